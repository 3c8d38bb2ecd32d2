//! Grover circuit generation: oracle, diffuser, full algorithm and seeded
//! sampling of generation requests.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::{Bitstring, MAX_QUBITS};
use crate::qasm::{GateDef, QasmProgram, QubitRef, Register, Statement};

/// Prefix of the formal qubit names inside generated definitions.
pub const FORMAL_PREFIX: &str = "_gate_q_";
/// Default cap on the number of marked states in sampled experiments.
pub const DEFAULT_MAX_MARKED: usize = 3;

/// Subset counts up to this size are enumerated and shuffled; larger spaces
/// are rejection-sampled.
const ENUMERATION_LIMIT: u128 = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CircuitError {
    #[error("invalid marked state: {0}")]
    InvalidMarkedState(String),
    #[error("domain error: {0}")]
    Domain(String),
}

pub fn formal_name(qubit: usize) -> String {
    format!("{FORMAL_PREFIX}{qubit}")
}

fn formals(n: usize) -> Vec<String> {
    (0..n).map(formal_name).collect()
}

fn call(name: &str, qubits: impl IntoIterator<Item = usize>) -> Statement {
    Statement::call(
        name,
        qubits
            .into_iter()
            .map(|q| QubitRef::Formal(formal_name(q)))
            .collect(),
    )
}

/// What the emitted program contains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Definitions, initialization, `k` iterations and measurements.
    #[default]
    Full,
    /// Only the Oracle definition.
    OracleOnly,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Full => "full",
            Mode::OracleOnly => "oracle_only",
        })
    }
}

impl FromStr for Mode {
    type Err = CircuitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" => Ok(Mode::Full),
            "oracle_only" | "oracle-only" => Ok(Mode::OracleOnly),
            other => Err(CircuitError::Domain(format!("unknown mode `{other}`"))),
        }
    }
}

/// A generation request: `n` qubits, the marked states, `k` iterations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroverSpec {
    pub n: usize,
    pub marked: Vec<Bitstring>,
    pub k: usize,
}

impl GroverSpec {
    pub fn new(n: usize, marked: &[&str], k: usize) -> Result<Self, CircuitError> {
        let marked = marked
            .iter()
            .map(|s| {
                Bitstring::parse_with_width(s, n)
                    .map_err(|e| CircuitError::InvalidMarkedState(e.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let spec = Self { n, marked, k };
        spec.validate()?;
        Ok(spec)
    }

    /// Spec with `k = k_opt(n, t)`.
    pub fn with_optimal_iterations(n: usize, marked: Vec<Bitstring>) -> Result<Self, CircuitError> {
        validate_marked(n, &marked)?;
        let k = optimal_iterations(n, marked.len())?;
        Ok(Self { n, marked, k })
    }

    pub fn t(&self) -> usize {
        self.marked.len()
    }

    pub fn validate(&self) -> Result<(), CircuitError> {
        validate_marked(self.n, &self.marked)
    }
}

fn validate_marked(n: usize, marked: &[Bitstring]) -> Result<(), CircuitError> {
    if !(2..=MAX_QUBITS).contains(&n) {
        return Err(CircuitError::Domain(format!(
            "qubit count {n} outside 2..={MAX_QUBITS}"
        )));
    }
    if marked.is_empty() {
        return Err(CircuitError::InvalidMarkedState(
            "at least one marked state is required".into(),
        ));
    }
    if marked.len() as u128 >= 1u128 << n {
        return Err(CircuitError::InvalidMarkedState(format!(
            "{} marked states leave no unmarked state among {}",
            marked.len(),
            1u128 << n
        )));
    }
    let mut seen = BTreeSet::new();
    for b in marked {
        if b.width() != n {
            return Err(CircuitError::InvalidMarkedState(format!(
                "{b} has length {}, expected {n}",
                b.width()
            )));
        }
        if !seen.insert(*b) {
            return Err(CircuitError::InvalidMarkedState(format!("{b} is repeated")));
        }
    }
    Ok(())
}

/// Phase oracle: one block per marked state, each block X-conjugating the
/// qubits whose bit is 0 around an `mcmt` over all qubits.
pub fn create_oracle(n: usize, marked: &[Bitstring]) -> Result<GateDef, CircuitError> {
    validate_marked(n, marked)?;
    let mut body = Vec::new();
    for state in marked {
        // Reversing the string puts qubit i at position i, so the zero
        // positions of the reversed string are the qubits with bit 0.
        let zeros: Vec<usize> = (0..n).filter(|&q| !state.qubit(q)).collect();
        body.extend(zeros.iter().map(|&q| call("x", [q])));
        body.push(call("mcmt", 0..n));
        body.extend(zeros.iter().map(|&q| call("x", [q])));
    }
    Ok(GateDef {
        name: "Oracle".into(),
        params: Vec::new(),
        formal_qubits: formals(n),
        body,
    })
}

/// Inversion about the mean, `2|s⟩⟨s| − I` up to global phase.
pub fn create_diffuser(n: usize) -> GateDef {
    assert!(n >= 2, "diffuser needs at least two qubits");
    let last = n - 1;
    let mut body = Vec::with_capacity(4 * n + 3);
    body.extend((0..n).map(|q| call("h", [q])));
    body.extend((0..n).map(|q| call("x", [q])));
    body.push(call("h", [last]));
    body.push(if n == 2 {
        call("cx", [0, 1])
    } else {
        call("mcx", 0..n)
    });
    body.push(call("h", [last]));
    body.extend((0..n).map(|q| call("x", [q])));
    body.extend((0..n).map(|q| call("h", [q])));
    GateDef {
        name: "Diffuser".into(),
        params: Vec::new(),
        formal_qubits: formals(n),
        body,
    }
}

/// Definition of the multi-controlled Z used by full programs: `cz` on two
/// qubits, otherwise an H-conjugated `mcx` on the last qubit.
pub fn create_mcmt(n: usize) -> GateDef {
    assert!(n >= 2, "mcmt needs at least two qubits");
    let body = if n == 2 {
        vec![call("cz", [0, 1])]
    } else {
        vec![call("h", [n - 1]), call("mcx", 0..n), call("h", [n - 1])]
    };
    GateDef {
        name: "mcmt".into(),
        params: Vec::new(),
        formal_qubits: formals(n),
        body,
    }
}

/// `⌊(π/4)·√(N/t)⌋` with `N = 2^n`.
pub fn optimal_iterations(n: usize, t: usize) -> Result<usize, CircuitError> {
    if n == 0 || n > MAX_QUBITS || t == 0 || t as u128 >= 1u128 << n {
        return Err(CircuitError::Domain(format!(
            "need 1 <= t < 2^n, got n={n}, t={t}"
        )));
    }
    let ratio = (1u64 << n) as f64 / t as f64;
    Ok((std::f64::consts::FRAC_PI_4 * ratio.sqrt()).floor() as usize)
}

pub fn build_grover(spec: &GroverSpec, mode: Mode) -> Result<QasmProgram, CircuitError> {
    spec.validate()?;
    let n = spec.n;
    let oracle = create_oracle(n, &spec.marked)?;
    let mut program = QasmProgram::new();
    match mode {
        Mode::OracleOnly => {
            program.gate_defs.push(oracle);
        }
        Mode::Full => {
            program.gate_defs = vec![create_mcmt(n), oracle, create_diffuser(n)];
            program.clbit_decl = Some(Register::new("c", n));
            program.qubit_decl = Some(Register::new("q", n));
            let all = || {
                (0..n)
                    .map(|i| QubitRef::indexed("q", i))
                    .collect::<Vec<_>>()
            };
            program
                .statements
                .extend((0..n).map(|i| Statement::call("h", vec![QubitRef::indexed("q", i)])));
            for _ in 0..spec.k {
                program.statements.push(Statement::call("Oracle", all()));
                program.statements.push(Statement::call("Diffuser", all()));
            }
            program
                .statements
                .extend((0..n).map(|i| Statement::Measure {
                    qubit: QubitRef::indexed("q", i),
                    clbit: QubitRef::indexed("c", i),
                }));
        }
    }
    Ok(program)
}

/// Number of `t`-subsets of `2^n` states, saturating.
pub fn subset_count(n: usize, t: usize) -> u128 {
    let total = 1u128.checked_shl(n as u32).unwrap_or(u128::MAX);
    if t as u128 > total {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..t as u128 {
        acc = match acc.checked_mul(total - i) {
            Some(v) => v / (i + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Every `t`-subset of basis indices below `total`, in lexicographic order.
fn combinations(total: u64, t: usize) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    let mut current: Vec<u64> = (0..t as u64).collect();
    if t as u64 > total {
        return out;
    }
    loop {
        out.push(current.clone());
        let mut i = t;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if current[i] < total - (t - i) as u64 {
                break;
            }
        }
        current[i] += 1;
        for j in i + 1..t {
            current[j] = current[j - 1] + 1;
        }
    }
}

/// `count` distinct marked sets of size `t`, each with `k = k_opt(n, t)`,
/// reproducible from `seed`. `t` is capped at `min(n, 3)`.
pub fn sample_specs(
    n: usize,
    t: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<GroverSpec>, CircuitError> {
    sample_specs_capped(n, t, count, seed, DEFAULT_MAX_MARKED)
}

/// As [`sample_specs`] with a custom cap on `t` (still bounded by `n`).
pub fn sample_specs_capped(
    n: usize,
    t: usize,
    count: usize,
    seed: u64,
    max_marked: usize,
) -> Result<Vec<GroverSpec>, CircuitError> {
    if !(2..=MAX_QUBITS).contains(&n) {
        return Err(CircuitError::Domain(format!("qubit count {n} unsupported")));
    }
    if t == 0 || t > n.min(max_marked) {
        return Err(CircuitError::Domain(format!(
            "t={t} must lie in 1..={} for n={n}",
            n.min(max_marked)
        )));
    }
    let available = subset_count(n, t);
    if count as u128 > available {
        return Err(CircuitError::Domain(format!(
            "{count} samples requested but only {available} distinct {t}-subsets exist for n={n}"
        )));
    }
    let k = optimal_iterations(n, t)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = 1u64 << n;

    let sets: Vec<Vec<u64>> = if available <= ENUMERATION_LIMIT {
        let all = combinations(total, t);
        index::sample(&mut rng, all.len(), count)
            .into_iter()
            .map(|i| all[i].clone())
            .collect()
    } else {
        let mut seen = BTreeSet::new();
        let mut sets = Vec::with_capacity(count);
        while sets.len() < count {
            let mut set: Vec<u64> = index::sample(&mut rng, total as usize, t)
                .into_iter()
                .map(|i| i as u64)
                .collect();
            set.sort_unstable();
            if seen.insert(set.clone()) {
                sets.push(set);
            }
        }
        sets
    };

    Ok(sets
        .into_iter()
        .map(|set| GroverSpec {
            n,
            marked: set
                .into_iter()
                .map(|i| Bitstring::from_index(n, i))
                .collect(),
            k,
        })
        .collect())
}

/// Every marked set of size `t` on `n` qubits with `k = k_opt`.
pub fn exhaustive_specs(n: usize, t: usize) -> Result<Vec<GroverSpec>, CircuitError> {
    let k = optimal_iterations(n, t)?;
    Ok(combinations(1u64 << n, t)
        .into_iter()
        .map(|set| GroverSpec {
            n,
            marked: set
                .into_iter()
                .map(|i| Bitstring::from_index(n, i))
                .collect(),
            k,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qasm::fixtures::TWO_QUBIT_GROVER;
    use crate::qasm::{parse_program, print_program};

    fn bodies(def: &GateDef) -> Vec<String> {
        def.body.iter().map(ToString::to_string).collect()
    }

    fn b(s: &str) -> Bitstring {
        s.parse().unwrap()
    }

    #[test]
    fn oracle_for_all_zeros() {
        let oracle = create_oracle(2, &[b("00")]).unwrap();
        assert_eq!(
            bodies(&oracle),
            [
                "x _gate_q_0;",
                "x _gate_q_1;",
                "mcmt _gate_q_0, _gate_q_1;",
                "x _gate_q_0;",
                "x _gate_q_1;"
            ]
        );
    }

    #[test]
    fn oracle_for_all_ones_has_no_x() {
        let oracle = create_oracle(2, &[b("11")]).unwrap();
        assert_eq!(bodies(&oracle), ["mcmt _gate_q_0, _gate_q_1;"]);
    }

    #[test]
    fn oracle_with_two_blocks() {
        let oracle = create_oracle(4, &[b("0111"), b("1101")]).unwrap();
        let mcmt = "mcmt _gate_q_0, _gate_q_1, _gate_q_2, _gate_q_3;";
        assert_eq!(
            bodies(&oracle),
            [
                "x _gate_q_3;",
                mcmt,
                "x _gate_q_3;",
                "x _gate_q_1;",
                mcmt,
                "x _gate_q_1;"
            ]
        );
    }

    #[test]
    fn oracle_rejects_bad_marked_sets() {
        assert!(matches!(
            create_oracle(3, &[b("01")]),
            Err(CircuitError::InvalidMarkedState(_))
        ));
        assert!(matches!(
            create_oracle(2, &[b("01"), b("01")]),
            Err(CircuitError::InvalidMarkedState(_))
        ));
        let everything: Vec<Bitstring> = Bitstring::all(2).collect();
        assert!(matches!(
            create_oracle(2, &everything),
            Err(CircuitError::InvalidMarkedState(_))
        ));
        assert!(GroverSpec::new(2, &["0a"], 1).is_err());
    }

    #[test]
    fn diffuser_shapes() {
        let two = create_diffuser(2);
        assert_eq!(two.body.len(), 11);
        assert_eq!(two.body[5].to_string(), "cx _gate_q_0, _gate_q_1;");
        let three = create_diffuser(3);
        assert_eq!(three.body.len(), 15);
        assert_eq!(
            three.body[7].to_string(),
            "mcx _gate_q_0, _gate_q_1, _gate_q_2;"
        );
    }

    #[test]
    fn optimal_iteration_values() {
        assert_eq!(optimal_iterations(2, 1), Ok(1));
        assert_eq!(optimal_iterations(4, 2), Ok(2));
        assert_eq!(optimal_iterations(2, 2), Ok(1));
        assert_eq!(optimal_iterations(3, 3), Ok(1));
        assert_eq!(optimal_iterations(3, 1), Ok(2));
        assert!(optimal_iterations(2, 4).is_err());
        assert!(optimal_iterations(2, 0).is_err());
    }

    #[test]
    fn full_program_matches_two_qubit_listing() {
        let spec = GroverSpec::new(2, &["00"], 1).unwrap();
        let program = build_grover(&spec, Mode::Full).unwrap();
        assert_eq!(program, parse_program(TWO_QUBIT_GROVER).unwrap());
        assert_eq!(print_program(&program), TWO_QUBIT_GROVER);
    }

    #[test]
    fn oracle_only_program() {
        let spec = GroverSpec::new(3, &["110"], 2).unwrap();
        let program = build_grover(&spec, Mode::OracleOnly).unwrap();
        assert_eq!(program.gate_defs.len(), 1);
        assert_eq!(program.gate_defs[0].name, "Oracle");
        assert!(program.statements.is_empty());
        assert!(program.qubit_decl.is_none());
        let text = print_program(&program);
        assert_eq!(parse_program(&text).unwrap(), program);
    }

    #[test]
    fn generated_programs_parse_for_all_sizes() {
        for n in 2..=10 {
            for t in 1..=n.min(3) {
                let spec = &sample_specs(n, t, 1, 7).unwrap()[0];
                for mode in [Mode::Full, Mode::OracleOnly] {
                    let program = build_grover(spec, mode).unwrap();
                    let reparsed = parse_program(&print_program(&program)).unwrap();
                    assert_eq!(reparsed, program);
                    crate::qasm::expand_gate_calls(&reparsed).unwrap();
                }
            }
        }
    }

    #[test]
    fn sampling_exhausts_small_spaces() {
        let specs = sample_specs(2, 1, 4, 11).unwrap();
        let mut seen: Vec<String> = specs.iter().map(|s| s.marked[0].to_string()).collect();
        seen.sort();
        assert_eq!(seen, ["00", "01", "10", "11"]);
        assert!(specs.iter().all(|s| s.k == 1));
    }

    #[test]
    fn sampling_is_deterministic() {
        assert_eq!(
            sample_specs(3, 2, 10, 42).unwrap(),
            sample_specs(3, 2, 10, 42).unwrap()
        );
        assert_ne!(
            sample_specs(6, 2, 10, 42).unwrap(),
            sample_specs(6, 2, 10, 43).unwrap()
        );
    }

    #[test]
    fn sampling_errors() {
        assert!(matches!(
            sample_specs(2, 1, 5, 0),
            Err(CircuitError::Domain(_))
        ));
        assert!(matches!(
            sample_specs(5, 4, 1, 0),
            Err(CircuitError::Domain(_))
        ));
        assert!(sample_specs_capped(5, 4, 1, 0, 5).is_ok());
        assert!(matches!(
            sample_specs(2, 3, 1, 0),
            Err(CircuitError::Domain(_))
        ));
    }

    #[test]
    fn large_space_sampling_is_distinct() {
        let specs = sample_specs(10, 3, 500, 1).unwrap();
        let distinct: BTreeSet<_> = specs.iter().map(|s| s.marked.clone()).collect();
        assert_eq!(distinct.len(), 500);
        assert!(specs.iter().all(|s| s.validate().is_ok()));
    }

    #[test]
    fn subset_counts() {
        assert_eq!(subset_count(2, 1), 4);
        assert_eq!(subset_count(3, 3), 56);
        assert_eq!(subset_count(5, 3), 4960);
        assert_eq!(combinations(5, 2).len(), 10);
        assert_eq!(exhaustive_specs(3, 2).unwrap().len(), 28);
    }
}
