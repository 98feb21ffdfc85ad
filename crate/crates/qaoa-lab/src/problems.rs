//! Problem instances and their QUBO cost/penalty functions.
//!
//! Three use cases are covered: unit commitment (UC), traveling
//! salesperson (TSP) and factory layout (FL). Each builder returns a
//! [`ProblemFunctions`] bundle holding the cost function, the penalty
//! functions and a validity predicate, all over bitstrings.
//!
//! Bit convention: variable `i` is bit `i` of the state index (least
//! significant bit first). Double-indexed variables are flattened
//! row-major with the city/machine index as the major axis, so
//! `x[i][j]` lives at bit `i * n_minor + j`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("instance shape: {0}")]
    Shape(String),
    #[error("infeasible instance: {0}")]
    Infeasible(String),
    #[error("degenerate instance: {0}")]
    Degenerate(String),
}

/// A real-valued function over bitstrings (state indices).
pub type BitFn = Box<dyn Fn(usize) -> f64 + Send + Sync>;
/// A predicate over bitstrings.
pub type ValidityFn = Box<dyn Fn(usize) -> bool + Send + Sync>;

#[inline]
fn bit(x: usize, i: usize) -> bool {
    (x >> i) & 1 == 1
}

/// Cost, penalties and validity of one problem instance.
///
/// Invariant maintained by all builders: a bitstring is valid if and
/// only if every penalty evaluates to exactly zero on it.
pub struct ProblemFunctions {
    n: usize,
    cost: BitFn,
    penalties: Vec<BitFn>,
    validity: ValidityFn,
}

impl ProblemFunctions {
    pub fn new(n: usize, cost: BitFn, penalties: Vec<BitFn>, validity: ValidityFn) -> Self {
        Self {
            n,
            cost,
            penalties,
            validity,
        }
    }

    /// Number of binary variables (= qubits).
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cost(&self, x: usize) -> f64 {
        (self.cost)(x)
    }

    pub fn n_penalties(&self) -> usize {
        self.penalties.len()
    }

    pub fn penalty(&self, j: usize, x: usize) -> f64 {
        (self.penalties[j])(x)
    }

    /// Sum of all penalty terms at `x` (unweighted).
    pub fn total_penalty(&self, x: usize) -> f64 {
        self.penalties.iter().map(|p| p(x)).sum()
    }

    pub fn is_valid(&self, x: usize) -> bool {
        (self.validity)(x)
    }
}

// ---------------------------------------------------------------------------
// Unit commitment
// ---------------------------------------------------------------------------

/// Unit commitment: pick power units so the produced power matches the
/// demand at minimal cost. Unit `i` produces the fixed amount `p[i]`
/// when on; running it costs `a[i] + b[i] p[i] + c[i] p[i]^2`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct UcInstance {
    pub n_units: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    /// Fixed integer power output per unit.
    pub p: Vec<u64>,
    /// Integer power demand.
    pub demand: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl UcInstance {
    pub fn validate(&self) -> Result<(), ProblemError> {
        if self.n_units == 0 {
            return Err(ProblemError::Shape("n_units must be positive".into()));
        }
        for (name, len) in [
            ("a", self.a.len()),
            ("b", self.b.len()),
            ("c", self.c.len()),
            ("p", self.p.len()),
        ] {
            if len != self.n_units {
                return Err(ProblemError::Shape(format!(
                    "{name} has length {len}, expected {}",
                    self.n_units
                )));
            }
        }
        if self.p.iter().any(|&pi| pi == 0) {
            return Err(ProblemError::Shape("all p_i must be >= 1".into()));
        }
        Ok(())
    }
}

/// Build the UC cost and penalty functions.
///
/// Cost: sum over committed units of `a_i + b_i p_i + c_i p_i^2`.
/// Single penalty: squared power mismatch `(sum_i p_i x_i - demand)^2`.
pub fn build_uc(inst: &UcInstance) -> Result<ProblemFunctions, ProblemError> {
    inst.validate()?;
    let n = inst.n_units;
    let unit_cost: Vec<f64> = (0..n)
        .map(|i| {
            let p = inst.p[i] as f64;
            inst.a[i] + inst.b[i] * p + inst.c[i] * p * p
        })
        .collect();
    let powers = inst.p.clone();
    let demand = inst.demand;

    let cost: BitFn = Box::new(move |x| {
        (0..n)
            .filter(|&i| bit(x, i))
            .map(|i| unit_cost[i])
            .sum::<f64>()
    });
    let powers_pen = powers.clone();
    let penalty: BitFn = Box::new(move |x| {
        let produced: i64 = (0..n)
            .filter(|&i| bit(x, i))
            .map(|i| powers_pen[i] as i64)
            .sum();
        let miss = produced - demand as i64;
        (miss * miss) as f64
    });
    let validity: ValidityFn = Box::new(move |x| {
        let produced: u64 = (0..n).filter(|&i| bit(x, i)).map(|i| powers[i]).sum();
        produced == demand
    });
    Ok(ProblemFunctions::new(n, cost, vec![penalty], validity))
}

// ---------------------------------------------------------------------------
// Traveling salesperson
// ---------------------------------------------------------------------------

/// TSP over `n_cities` cities with a symmetric distance matrix.
/// Variable `x[i][j]` means city `i` is visited at time step `j`;
/// the tour is cyclic (time `n_cities - 1` connects back to time 0).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TspInstance {
    pub n_cities: usize,
    pub distances: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl TspInstance {
    pub fn validate(&self) -> Result<(), ProblemError> {
        let n = self.n_cities;
        if n == 0 {
            return Err(ProblemError::Shape("n_cities must be positive".into()));
        }
        if self.distances.len() != n || self.distances.iter().any(|row| row.len() != n) {
            return Err(ProblemError::Shape(format!(
                "distance matrix must be {n}x{n}"
            )));
        }
        for i in 0..n {
            if self.distances[i][i] != 0.0 {
                return Err(ProblemError::Shape("distance diagonal must be zero".into()));
            }
            for j in 0..n {
                if self.distances[i][j] != self.distances[j][i] {
                    return Err(ProblemError::Shape("distance matrix must be symmetric".into()));
                }
                // Zero off-diagonals are degenerate but buildable; the
                // generator always produces strictly positive distances.
                if self.distances[i][j] < 0.0 {
                    return Err(ProblemError::Shape("distances must be nonnegative".into()));
                }
            }
        }
        Ok(())
    }
}

/// Build the TSP cost and penalty functions over `n_cities^2` variables.
///
/// Cost sums the distance of every movement between consecutive time
/// steps (cyclically). The single penalty family enforces one city per
/// time step and one time step per city; both terms share one penalty
/// factor.
pub fn build_tsp(inst: &TspInstance) -> Result<ProblemFunctions, ProblemError> {
    inst.validate()?;
    let nc = inst.n_cities;
    let n = nc * nc;
    let idx = move |city: usize, time: usize| city * nc + time;
    let d = inst.distances.clone();

    let cost: BitFn = Box::new(move |x| {
        let mut total = 0.0;
        for j in 0..nc {
            let jn = (j + 1) % nc;
            for i in 0..nc {
                if !bit(x, idx(i, j)) {
                    continue;
                }
                for i2 in 0..nc {
                    if bit(x, idx(i2, jn)) {
                        total += d[i][i2];
                    }
                }
            }
        }
        total
    });
    let penalty: BitFn = Box::new(move |x| {
        let mut total = 0i64;
        for i in 0..nc {
            let row: i64 = (0..nc).filter(|&j| bit(x, idx(i, j))).count() as i64;
            total += (1 - row) * (1 - row);
        }
        for j in 0..nc {
            let col: i64 = (0..nc).filter(|&i| bit(x, idx(i, j))).count() as i64;
            total += (1 - col) * (1 - col);
        }
        total as f64
    });
    let validity: ValidityFn = Box::new(move |x| {
        (0..nc).all(|i| (0..nc).filter(|&j| bit(x, idx(i, j))).count() == 1)
            && (0..nc).all(|j| (0..nc).filter(|&i| bit(x, idx(i, j))).count() == 1)
    });
    Ok(ProblemFunctions::new(n, cost, vec![penalty], validity))
}

// ---------------------------------------------------------------------------
// Factory layout
// ---------------------------------------------------------------------------

/// Factory layout: place `n_machines` machines on `n_positions`
/// positions minimizing transport cost. `distances` is over positions,
/// `transport` is the material flow between machines (not necessarily
/// symmetric). Variable `x[i][j]` means machine `i` sits on position `j`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FlInstance {
    pub n_machines: usize,
    pub n_positions: usize,
    pub distances: Vec<Vec<f64>>,
    pub transport: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl FlInstance {
    pub fn validate(&self) -> Result<(), ProblemError> {
        let (nm, np) = (self.n_machines, self.n_positions);
        if nm == 0 || np == 0 {
            return Err(ProblemError::Shape("machine and position counts must be positive".into()));
        }
        if nm > np {
            return Err(ProblemError::Infeasible(format!(
                "{nm} machines cannot be placed on {np} positions"
            )));
        }
        if self.distances.len() != np || self.distances.iter().any(|r| r.len() != np) {
            return Err(ProblemError::Shape(format!("distance matrix must be {np}x{np}")));
        }
        if self.transport.len() != nm || self.transport.iter().any(|r| r.len() != nm) {
            return Err(ProblemError::Shape(format!("transport matrix must be {nm}x{nm}")));
        }
        for j in 0..np {
            if self.distances[j][j] != 0.0 {
                return Err(ProblemError::Shape("distance diagonal must be zero".into()));
            }
            for j2 in 0..np {
                if self.distances[j][j2] != self.distances[j2][j] {
                    return Err(ProblemError::Shape("distance matrix must be symmetric".into()));
                }
            }
        }
        if self.transport.iter().flatten().any(|&t| t < 0.0) {
            return Err(ProblemError::Shape("transport entries must be >= 0".into()));
        }
        Ok(())
    }
}

/// Build the FL cost and the two penalty functions over
/// `n_machines * n_positions` variables.
///
/// Cost sums `distances[j][j'] * transport[i][i']` over ordered machine
/// pairs and their positions. Penalty 0 forces every machine onto
/// exactly one position; penalty 1 adds one unit per ordered pair of
/// distinct machines sharing a position.
pub fn build_fl(inst: &FlInstance) -> Result<ProblemFunctions, ProblemError> {
    inst.validate()?;
    let (nm, np) = (inst.n_machines, inst.n_positions);
    let n = nm * np;
    let idx = move |machine: usize, pos: usize| machine * np + pos;
    let d = inst.distances.clone();
    let t = inst.transport.clone();

    let cost: BitFn = Box::new(move |x| {
        let mut total = 0.0;
        for i in 0..nm {
            for j in 0..np {
                if !bit(x, idx(i, j)) {
                    continue;
                }
                for i2 in 0..nm {
                    for j2 in 0..np {
                        if bit(x, idx(i2, j2)) {
                            total += d[j][j2] * t[i][i2];
                        }
                    }
                }
            }
        }
        total
    });
    let machine_once: BitFn = Box::new(move |x| {
        let mut total = 0i64;
        for i in 0..nm {
            let placed = (0..np).filter(|&j| bit(x, idx(i, j))).count() as i64;
            total += (placed - 1) * (placed - 1);
        }
        total as f64
    });
    let position_once: BitFn = Box::new(move |x| {
        let mut total = 0i64;
        for j in 0..np {
            let occupants = (0..nm).filter(|&i| bit(x, idx(i, j))).count() as i64;
            total += occupants * (occupants - 1);
        }
        total as f64
    });
    let validity: ValidityFn = Box::new(move |x| {
        (0..nm).all(|i| (0..np).filter(|&j| bit(x, idx(i, j))).count() == 1)
            && (0..np).all(|j| (0..nm).filter(|&i| bit(x, idx(i, j))).count() <= 1)
    });
    Ok(ProblemFunctions::new(
        n,
        cost,
        vec![machine_once, position_once],
        validity,
    ))
}

// ---------------------------------------------------------------------------
// Seeded generators
// ---------------------------------------------------------------------------

/// Generate a feasible UC instance.
///
/// Coefficients are uniform integers: `a in [1,20]`, `b in [1,10]`,
/// `c in [0,3]`, `p in [1,50]`. The demand is the total power of a
/// random nonempty proper subset of units, so at least one valid
/// commitment always exists.
pub fn generate_uc_instance(n_units: usize, seed: u64) -> Result<UcInstance, ProblemError> {
    if n_units < 2 {
        return Err(ProblemError::Degenerate(
            "UC generation needs at least 2 units".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a: Vec<f64> = (0..n_units).map(|_| rng.gen_range(1..=20) as f64).collect();
    let b: Vec<f64> = (0..n_units).map(|_| rng.gen_range(1..=10) as f64).collect();
    let c: Vec<f64> = (0..n_units).map(|_| rng.gen_range(0..=3) as f64).collect();
    let p: Vec<u64> = (0..n_units).map(|_| rng.gen_range(1..=50)).collect();
    let subset: Vec<bool> = loop {
        let picks: Vec<bool> = (0..n_units).map(|_| rng.gen_bool(0.5)).collect();
        let count = picks.iter().filter(|&&b| b).count();
        if count > 0 && count < n_units {
            break picks;
        }
    };
    let demand = p
        .iter()
        .zip(&subset)
        .filter(|(_, &on)| on)
        .map(|(&pi, _)| pi)
        .sum();
    Ok(UcInstance {
        n_units,
        a,
        b,
        c,
        p,
        demand,
        seed: Some(seed),
    })
}

/// Generate a TSP instance with integer distances in `[1, 20]`.
pub fn generate_tsp_instance(n_cities: usize, seed: u64) -> Result<TspInstance, ProblemError> {
    if n_cities < 2 {
        return Err(ProblemError::Degenerate(
            "TSP generation needs at least 2 cities".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut d = vec![vec![0.0; n_cities]; n_cities];
    for i in 0..n_cities {
        for j in (i + 1)..n_cities {
            let dist = rng.gen_range(1..=20) as f64;
            d[i][j] = dist;
            d[j][i] = dist;
        }
    }
    Ok(TspInstance {
        n_cities,
        distances: d,
        seed: Some(seed),
    })
}

/// Generate an FL instance with integer position distances in `[1, 20]`
/// and integer machine flows in `[0, 5]`.
pub fn generate_fl_instance(
    n_machines: usize,
    n_positions: usize,
    seed: u64,
) -> Result<FlInstance, ProblemError> {
    if n_machines == 0 {
        return Err(ProblemError::Degenerate(
            "FL generation needs at least 1 machine".into(),
        ));
    }
    if n_machines > n_positions {
        return Err(ProblemError::Infeasible(format!(
            "{n_machines} machines cannot be placed on {n_positions} positions"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut d = vec![vec![0.0; n_positions]; n_positions];
    for i in 0..n_positions {
        for j in (i + 1)..n_positions {
            let dist = rng.gen_range(1..=20) as f64;
            d[i][j] = dist;
            d[j][i] = dist;
        }
    }
    let mut t = vec![vec![0.0; n_machines]; n_machines];
    for i in 0..n_machines {
        for j in 0..n_machines {
            if i != j {
                t[i][j] = rng.gen_range(0..=5) as f64;
            }
        }
    }
    Ok(FlInstance {
        n_machines,
        n_positions,
        distances: d,
        transport: t,
        seed: Some(seed),
    })
}

// ---------------------------------------------------------------------------
// Tagged instance wrapper (serialization surface)
// ---------------------------------------------------------------------------

/// Any of the three problem instances, tagged for JSON round trips.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Instance {
    Uc(UcInstance),
    Tsp(TspInstance),
    Fl(FlInstance),
}

impl Instance {
    pub fn validate(&self) -> Result<(), ProblemError> {
        match self {
            Instance::Uc(i) => i.validate(),
            Instance::Tsp(i) => i.validate(),
            Instance::Fl(i) => i.validate(),
        }
    }

    pub fn build(&self) -> Result<ProblemFunctions, ProblemError> {
        match self {
            Instance::Uc(i) => build_uc(i),
            Instance::Tsp(i) => build_tsp(i),
            Instance::Fl(i) => build_fl(i),
        }
    }

    pub fn n_qubits(&self) -> usize {
        match self {
            Instance::Uc(i) => i.n_units,
            Instance::Tsp(i) => i.n_cities * i.n_cities,
            Instance::Fl(i) => i.n_machines * i.n_positions,
        }
    }

    /// Short identifier used in result files and scan metadata.
    pub fn label(&self) -> String {
        let seed = match self {
            Instance::Uc(i) => i.seed,
            Instance::Tsp(i) => i.seed,
            Instance::Fl(i) => i.seed,
        };
        let kind = match self {
            Instance::Uc(_) => "uc",
            Instance::Tsp(_) => "tsp",
            Instance::Fl(_) => "fl",
        };
        match seed {
            Some(s) => format!("{kind}-n{}-seed{s}", self.n_qubits()),
            None => format!("{kind}-n{}", self.n_qubits()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_unit_uc() -> UcInstance {
        UcInstance {
            n_units: 2,
            a: vec![1.0, 1.0],
            b: vec![1.0, 1.0],
            c: vec![0.0, 0.0],
            p: vec![2, 3],
            demand: 3,
            seed: None,
        }
    }

    // Bitstring literals below list variable 0 first, so "01" is x0=0,
    // x1=1, i.e. state index 2.

    #[test]
    fn uc_two_unit_exhaustive() {
        let f = build_uc(&two_unit_uc()).unwrap();
        assert_eq!(f.n(), 2);
        // 00, 10, 01, 11 as indices 0, 1, 2, 3
        assert_eq!(f.cost(0b00), 0.0);
        assert_eq!(f.cost(0b01), 3.0); // "10": unit 0 on
        assert_eq!(f.cost(0b10), 4.0); // "01": unit 1 on
        assert_eq!(f.cost(0b11), 7.0);
        assert_eq!(f.penalty(0, 0b00), 9.0);
        assert_eq!(f.penalty(0, 0b01), 1.0);
        assert_eq!(f.penalty(0, 0b10), 0.0);
        assert_eq!(f.penalty(0, 0b11), 4.0);
        let valid: Vec<usize> = (0..4).filter(|&x| f.is_valid(x)).collect();
        assert_eq!(valid, vec![0b10]);
    }

    #[test]
    fn uc_all_zero_bitstring() {
        let inst = generate_uc_instance(5, 3).unwrap();
        let f = build_uc(&inst).unwrap();
        assert_eq!(f.cost(0), 0.0);
        assert_eq!(f.penalty(0, 0), (inst.demand * inst.demand) as f64);
    }

    #[test]
    fn uc_shape_error() {
        let mut inst = two_unit_uc();
        inst.a.pop();
        assert!(matches!(build_uc(&inst), Err(ProblemError::Shape(_))));
    }

    #[test]
    fn tsp_two_city_tours() {
        let inst = TspInstance {
            n_cities: 2,
            distances: vec![vec![0.0, 5.0], vec![5.0, 0.0]],
            seed: None,
        };
        let f = build_tsp(&inst).unwrap();
        assert_eq!(f.n(), 4);
        let valid: Vec<usize> = (0..16).filter(|&x| f.is_valid(x)).collect();
        assert_eq!(valid.len(), 2);
        for x in valid {
            assert_eq!(f.cost(x), 10.0);
            assert_eq!(f.penalty(0, x), 0.0);
        }
    }

    #[test]
    fn tsp_zero_distances_identity_tour() {
        let nc = 3;
        let inst = TspInstance {
            n_cities: nc,
            distances: vec![vec![0.0; nc]; nc],
            seed: None,
        };
        let f = build_tsp(&inst).unwrap();
        // Identity assignment: city i visited at time i.
        let x = (0..nc).fold(0usize, |acc, i| acc | 1 << (i * nc + i));
        assert_eq!(f.cost(x), 0.0);
        assert_eq!(f.penalty(0, x), 0.0);
        assert!(f.is_valid(x));
    }

    #[test]
    fn tsp_rejects_asymmetric() {
        let inst = TspInstance {
            n_cities: 2,
            distances: vec![vec![0.0, 5.0], vec![4.0, 0.0]],
            seed: None,
        };
        assert!(matches!(build_tsp(&inst), Err(ProblemError::Shape(_))));
    }

    #[test]
    fn tsp_valid_count_is_factorial() {
        for n_cities in 2..=3 {
            let inst = generate_tsp_instance(n_cities, 11).unwrap();
            let f = build_tsp(&inst).unwrap();
            let count = (0..1usize << f.n()).filter(|&x| f.is_valid(x)).count();
            let factorial: usize = (1..=n_cities).product();
            assert_eq!(count, factorial);
        }
    }

    #[test]
    fn fl_single_machine_single_position() {
        let inst = FlInstance {
            n_machines: 1,
            n_positions: 1,
            distances: vec![vec![0.0]],
            transport: vec![vec![0.0]],
            seed: None,
        };
        let f = build_fl(&inst).unwrap();
        assert_eq!(f.cost(1), 0.0);
        assert_eq!(f.penalty(0, 1), 0.0);
        assert_eq!(f.penalty(1, 1), 0.0);
        assert!(f.is_valid(1));
        assert!(!f.is_valid(0));
    }

    #[test]
    fn fl_two_by_two_hand_enumeration() {
        let inst = FlInstance {
            n_machines: 2,
            n_positions: 2,
            distances: vec![vec![0.0, 1.0], vec![1.0, 0.0]],
            transport: vec![vec![0.0, 3.0], vec![3.0, 0.0]],
            seed: None,
        };
        let f = build_fl(&inst).unwrap();
        let valid: Vec<usize> = (0..16).filter(|&x| f.is_valid(x)).collect();
        assert_eq!(valid.len(), 2);
        for &x in &valid {
            assert_eq!(f.cost(x), 6.0);
            assert_eq!(f.total_penalty(x), 0.0);
        }
        // Cross-check against the full 16-bitstring table: only the two
        // permutation placements are penalty-free.
        for x in 0..16usize {
            assert_eq!(f.is_valid(x), f.total_penalty(x) == 0.0, "bitstring {x}");
        }
    }

    #[test]
    fn fl_rejects_more_machines_than_positions() {
        let inst = FlInstance {
            n_machines: 3,
            n_positions: 2,
            distances: vec![vec![0.0; 2]; 2],
            transport: vec![vec![0.0; 3]; 3],
            seed: None,
        };
        assert!(matches!(build_fl(&inst), Err(ProblemError::Infeasible(_))));
    }

    #[test]
    fn fl_valid_count_is_falling_factorial() {
        let inst = generate_fl_instance(2, 3, 5).unwrap();
        let f = build_fl(&inst).unwrap();
        let count = (0..1usize << f.n()).filter(|&x| f.is_valid(x)).count();
        assert_eq!(count, 6); // 3!/(3-2)!
    }

    #[test]
    fn generator_determinism() {
        assert_eq!(
            generate_uc_instance(6, 42).unwrap(),
            generate_uc_instance(6, 42).unwrap()
        );
        assert_eq!(
            generate_tsp_instance(3, 42).unwrap(),
            generate_tsp_instance(3, 42).unwrap()
        );
        assert_eq!(
            generate_fl_instance(2, 3, 42).unwrap(),
            generate_fl_instance(2, 3, 42).unwrap()
        );
        assert_ne!(
            generate_uc_instance(6, 42).unwrap(),
            generate_uc_instance(6, 43).unwrap()
        );
    }

    #[test]
    fn generated_uc_always_feasible() {
        for seed in 0..20 {
            let inst = generate_uc_instance(6, seed).unwrap();
            let f = build_uc(&inst).unwrap();
            assert!(
                (0..1usize << 6).any(|x| f.is_valid(x)),
                "seed {seed} produced an infeasible instance"
            );
        }
    }

    #[test]
    fn generated_uc_brute_force_is_fast() {
        let inst = generate_uc_instance(10, 7).unwrap();
        let f = build_uc(&inst).unwrap();
        let start = std::time::Instant::now();
        let best = (0..1usize << 10)
            .filter(|&x| f.is_valid(x))
            .map(|x| f.cost(x))
            .fold(f64::INFINITY, f64::min);
        assert!(best.is_finite());
        assert!(start.elapsed().as_secs_f64() < 1.0);
    }

    #[test]
    fn uc_generator_rejects_degenerate() {
        assert!(matches!(
            generate_uc_instance(1, 0),
            Err(ProblemError::Degenerate(_))
        ));
    }

    #[test]
    fn validity_iff_zero_penalties_exhaustive() {
        let cases: Vec<ProblemFunctions> = vec![
            build_uc(&generate_uc_instance(6, 1).unwrap()).unwrap(),
            build_uc(&generate_uc_instance(10, 2).unwrap()).unwrap(),
            build_tsp(&generate_tsp_instance(3, 3).unwrap()).unwrap(),
            build_fl(&generate_fl_instance(2, 4, 4).unwrap()).unwrap(),
            build_fl(&generate_fl_instance(3, 3, 5).unwrap()).unwrap(),
        ];
        for (k, f) in cases.iter().enumerate() {
            assert!(f.n() <= 12);
            for x in 0..1usize << f.n() {
                let zero = (0..f.n_penalties()).all(|j| f.penalty(j, x) == 0.0);
                assert_eq!(f.is_valid(x), zero, "case {k}, bitstring {x}");
            }
        }
    }

    #[test]
    fn uc_penalty_is_perfect_square() {
        let inst = generate_uc_instance(8, 9).unwrap();
        let f = build_uc(&inst).unwrap();
        for x in 0..1usize << 8 {
            let pen = f.penalty(0, x);
            assert!(pen >= 0.0);
            assert_eq!(pen == 0.0, f.is_valid(x));
            let root = pen.sqrt().round();
            assert_eq!(root * root, pen);
        }
    }

    #[test]
    fn instance_json_round_trip() {
        let inst = Instance::Uc(generate_uc_instance(4, 7).unwrap());
        let text = serde_json::to_string(&inst).unwrap();
        assert!(text.contains("\"kind\":\"uc\""));
        assert!(text.contains("\"seed\":7"));
        let back: Instance = serde_json::from_str(&text).unwrap();
        assert_eq!(inst, back);
        assert_eq!(inst.n_qubits(), 4);
        assert_eq!(inst.label(), "uc-n4-seed7");
    }
}
