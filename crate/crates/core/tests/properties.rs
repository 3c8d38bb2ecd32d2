use std::collections::BTreeSet;

use grover_symbolic::analyzer::{analyze_text, render_trace};
use grover_symbolic::circuits::{build_grover, create_diffuser, GroverSpec, Mode};
use grover_symbolic::metrics::{classical_fidelity, search_accuracy};
use grover_symbolic::qasm::{
    expand_call, parse_program, print_program, strip_measurements, PrimitiveGate, QasmProgram,
};
use grover_symbolic::simulator::{circuit_unitary, sv_simulate, StateVector};
use grover_symbolic::tokenizer::{
    build_vocabulary, char_count_baseline, line_level_tokenize, tokenize_program,
};
use grover_symbolic::{Bitstring, Distribution, C64};
use proptest::prelude::*;

const TWO_QUBIT: &str = include_str!("data/two_qubit_grover.qasm");

fn spec_strategy(max_n: usize) -> impl Strategy<Value = GroverSpec> {
    (2..=max_n)
        .prop_flat_map(|n| {
            let t_max = n.min(3);
            (
                Just(n),
                proptest::collection::btree_set(0..(1u64 << n), 1..=t_max),
                0usize..=3,
            )
        })
        .prop_map(|(n, set, k)| GroverSpec {
            n,
            marked: set
                .into_iter()
                .map(|i| Bitstring::from_index(n, i))
                .collect(),
            k,
        })
}

fn mode_strategy() -> impl Strategy<Value = Mode> {
    prop_oneof![Just(Mode::Full), Just(Mode::OracleOnly)]
}

fn gate_strategy(n: usize) -> impl Strategy<Value = PrimitiveGate> {
    let q = 0..n;
    let pair = (0..n, 0..n).prop_filter("distinct", |(a, b)| a != b);
    prop_oneof![
        q.clone().prop_map(PrimitiveGate::H),
        q.clone().prop_map(PrimitiveGate::X),
        q.clone().prop_map(PrimitiveGate::Z),
        (q, -3.0f64..3.0).prop_map(|(qubit, angle)| PrimitiveGate::Rz { angle, qubit }),
        pair.clone()
            .prop_map(|(control, target)| PrimitiveGate::Cx { control, target }),
        pair.prop_map(|(a, b)| PrimitiveGate::Cz(a, b)),
        Just(PrimitiveGate::Mcmt((0..n).collect())),
        Just(PrimitiveGate::Mcx {
            controls: (1..n).collect(),
            target: 0,
        }),
    ]
}

fn dist_strategy(n: usize) -> impl Strategy<Value = Distribution<f64>> {
    proptest::collection::vec(0.0f64..1.0, 1 << n).prop_map(move |mut v| {
        v[0] += 1e-3;
        let s: f64 = v.iter().sum();
        Distribution::from_dense(n, v.into_iter().map(|p| p / s))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn print_parse_round_trip(spec in spec_strategy(6), mode in mode_strategy()) {
        let program = build_grover(&spec, mode).unwrap();
        let text = print_program(&program);
        let parsed = parse_program(&text).unwrap();
        prop_assert_eq!(&parsed, &program);
        prop_assert_eq!(print_program(&parsed), text);
    }

    #[test]
    fn strip_is_idempotent(spec in spec_strategy(5)) {
        let program = build_grover(&spec, Mode::Full).unwrap();
        let once = strip_measurements(&program);
        prop_assert_eq!(strip_measurements(&once), once.clone());
        prop_assert_eq!(once.statements.len() + spec.n, program.statements.len());
    }

    #[test]
    fn analyzer_recovers_marked_states(spec in spec_strategy(8), mode in mode_strategy()) {
        let text = print_program(&build_grover(&spec, mode).unwrap());
        let trace = analyze_text(&text, mode).unwrap();
        prop_assert_eq!(&trace.marked, &spec.marked);
        prop_assert_eq!(trace.blocks.len(), spec.t());
    }

    #[test]
    fn gates_preserve_norm(
        gates in (2usize..=5).prop_flat_map(|n| {
            (Just(n), proptest::collection::vec(gate_strategy(n), 0..40))
        })
    ) {
        let (n, gates) = gates;
        let mut wide = StateVector::<f64>::zero(n);
        let mut narrow = StateVector::<f32>::zero(n);
        for g in &gates {
            wide.apply(g);
            narrow.apply(g);
        }
        prop_assert!((wide.norm_sqr() - 1.0).abs() < 1e-12);
        prop_assert!((narrow.norm_sqr() - 1.0).abs() < 1e-4);
        let gap = wide.probabilities().max_abs_diff(&narrow.probabilities().map_scalar());
        prop_assert!(gap < 1e-4);
    }

    #[test]
    fn classical_fidelity_is_symmetric(
        (p, q) in (1usize..=4).prop_flat_map(|n| (dist_strategy(n), dist_strategy(n)))
    ) {
        let pq = classical_fidelity(&p, &q).unwrap();
        let qp = classical_fidelity(&q, &p).unwrap();
        prop_assert!((pq - qp).abs() < 1e-15);
        prop_assert!((0.0..=1.0).contains(&pq));
        prop_assert!((classical_fidelity(&p, &p).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn search_accuracy_falls_with_tau(
        p in dist_strategy(4),
        marked in proptest::collection::btree_set(0u64..16, 1..=3),
        a in 0.0f64..=1.0,
        b in 0.0f64..=1.0,
    ) {
        let marked: Vec<Bitstring> = marked.into_iter().map(|i| Bitstring::from_index(4, i)).collect();
        let (lo, hi) = (a.min(b), a.max(b));
        let sa_lo = search_accuracy(&p, &marked, lo).unwrap();
        let sa_hi = search_accuracy(&p, &marked, hi).unwrap();
        prop_assert!(sa_lo >= sa_hi);
        prop_assert!((0.0..=1.0).contains(&sa_lo));
    }
}

fn diffuser_unitary(n: usize) -> grover_symbolic::simulator::DenseMatrix<f64> {
    let mut program = QasmProgram::new();
    program.gate_defs.push(create_diffuser(n));
    let qubits: Vec<usize> = (0..n).collect();
    let gates = expand_call(&program, "Diffuser", &qubits).unwrap();
    circuit_unitary(n, &gates, 12).unwrap()
}

#[test]
fn diffuser_reflects_about_uniform_state() {
    for n in 2..=5 {
        let d = diffuser_unitary(n);
        let dim = d.dim();
        let target = |i: usize, j: usize| 2.0 / dim as f64 - if i == j { 1.0 } else { 0.0 };
        let phase = d.get(0, 0) / target(0, 0);
        assert!((phase.norm() - 1.0).abs() < 1e-12, "n={n}: phase {phase}");
        for i in 0..dim {
            for j in 0..dim {
                let err = (d.get(i, j) - phase * target(i, j)).norm();
                assert!(err < 1e-12, "n={n}: entry ({i},{j}) off by {err}");
            }
        }
    }
}

#[test]
fn diffuser_squares_to_identity() {
    for n in 2..=5 {
        let mut program = QasmProgram::new();
        program.gate_defs.push(create_diffuser(n));
        let qubits: Vec<usize> = (0..n).collect();
        let mut gates = expand_call(&program, "Diffuser", &qubits).unwrap();
        gates.extend(gates.clone());
        let u = circuit_unitary::<f64>(n, &gates, 12).unwrap();
        assert!(u.unitarity_error() < 1e-12);
        for i in 0..u.dim() {
            for j in 0..u.dim() {
                let want = if i == j {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                };
                assert!((u.get(i, j) - want).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn two_qubit_listing_structure() {
    let program = parse_program(TWO_QUBIT).unwrap();
    let names: Vec<&str> = program.gate_defs.iter().map(|d| d.name.as_str()).collect();
    assert_eq!(names, ["mcmt", "Oracle", "Diffuser"]);
    assert_eq!(program.num_qubits(), Some(2));
    assert_eq!(program.statements.len(), 6);
    assert_eq!(strip_measurements(&program).statements.len(), 4);
    assert_eq!(print_program(&program), TWO_QUBIT);

    let oracle = expand_call(&program, "Oracle", &[0, 1]).unwrap();
    assert_eq!(
        oracle,
        [
            PrimitiveGate::X(0),
            PrimitiveGate::X(1),
            PrimitiveGate::Cz(0, 1),
            PrimitiveGate::X(0),
            PrimitiveGate::X(1),
        ]
    );
    assert_eq!(
        expand_call(&program, "Diffuser", &[0, 1]).unwrap().len(),
        11
    );

    // generator reproduces the listing
    let spec = GroverSpec::new(2, &["00"], 1).unwrap();
    assert_eq!(
        print_program(&build_grover(&spec, Mode::Full).unwrap()),
        TWO_QUBIT
    );
}

#[test]
fn two_qubit_listing_analysis() {
    let trace = analyze_text(TWO_QUBIT, Mode::Full).unwrap();
    assert_eq!(trace.marked, ["00".parse::<Bitstring>().unwrap()]);
    assert_eq!(trace.k, Some(1));
    assert_eq!(trace.results.prob("00".parse().unwrap()), 1.0);
    let text = render_trace(&trace);
    assert!(text.contains("=== Final Marked States ===\n00\n"), "{text}");
    assert!(text.contains(" '00': 1.0000,"), "{text}");

    let (_, sv) = sv_simulate::<f64>(&parse_program(TWO_QUBIT).unwrap()).unwrap();
    assert!((sv.prob("00".parse().unwrap()) - 1.0).abs() < 1e-12);
}

#[test]
fn tokenizer_program_examples() {
    let tokens: Vec<String> = tokenize_program("x q[0];\nx q[1];")
        .unwrap()
        .iter()
        .map(|t| t.as_str().to_string())
        .collect();
    assert_eq!(tokens, ["x", "q[0]", "x", "q[1]"]);
    assert!(tokenize_program("x q[0];\nbanana\n").is_err());

    let listing = tokenize_program(TWO_QUBIT).unwrap();
    assert!(listing.len() < TWO_QUBIT.chars().count());
    let lines = line_level_tokenize(TWO_QUBIT);
    assert_eq!(
        lines.len(),
        TWO_QUBIT.lines().filter(|l| !l.trim().is_empty()).count()
    );

    assert_eq!(char_count_baseline(""), 0);
    assert_eq!(
        char_count_baseline(TWO_QUBIT),
        TWO_QUBIT.chars().filter(|c| !c.is_whitespace()).count()
    );

    let corpus = [vec!["x", "q[0]"], vec!["x", "q[1]"]];
    let vocab = build_vocabulary(&corpus);
    assert_eq!(vocab.len(), 3);
    let empty: [Vec<&str>; 0] = [];
    assert!(build_vocabulary(&empty).is_empty());

    let distinct: BTreeSet<String> = ["x q[0];", "x q[1];"]
        .iter()
        .flat_map(|t| line_level_tokenize(t))
        .collect();
    assert_eq!(distinct.len(), 2);
}
