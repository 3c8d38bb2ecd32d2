//! The QASM 3.0 subset emitted for Grover circuits: parsing, canonical
//! printing, gate expansion and measurement stripping.

mod expand;
mod lexer;
mod parser;
mod printer;

use std::fmt;

use thiserror::Error;

pub use expand::{expand_call, expand_gate_calls, PrimitiveGate};
pub use parser::parse_program;
pub use printer::print_program;

pub const VERSION: &str = "3.0";
pub const STDGATES: &str = "stdgates.inc";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QasmError {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown gate `{name}` at line {line}")]
    UnknownGate { name: String, line: usize },
    #[error("gate `{name}` at line {line} expects {expected}, found {found}")]
    ArityMismatch {
        name: String,
        expected: String,
        found: String,
        line: usize,
    },
    #[error("qubit reference `{reference}` at line {line}: {reason}")]
    BadQubit {
        reference: String,
        reason: String,
        line: usize,
    },
    #[error("gate `{0}` is defined more than once")]
    DuplicateDefinition(String),
    #[error("gate definitions are cyclic through `{0}`")]
    RecursionDetected(String),
    #[error("program has no qubit register declaration")]
    NoQubitRegister,
}

/// Built-in gates the simulators understand directly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Primitive {
    H,
    X,
    Z,
    Cx,
    Cz,
    /// Multi-controlled Z: phase −1 on the all-ones subspace of its arguments.
    Mcmt,
    /// Multi-controlled X: controls are all arguments but the last.
    Mcx,
    Rz,
}

impl Primitive {
    pub const ALL: [Primitive; 8] = [
        Primitive::H,
        Primitive::X,
        Primitive::Z,
        Primitive::Cx,
        Primitive::Cz,
        Primitive::Mcmt,
        Primitive::Mcx,
        Primitive::Rz,
    ];

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }

    pub fn name(self) -> &'static str {
        match self {
            Primitive::H => "h",
            Primitive::X => "x",
            Primitive::Z => "z",
            Primitive::Cx => "cx",
            Primitive::Cz => "cz",
            Primitive::Mcmt => "mcmt",
            Primitive::Mcx => "mcx",
            Primitive::Rz => "rz",
        }
    }

    /// Minimum and (if fixed) maximum qubit count.
    pub fn qubit_arity(self) -> (usize, Option<usize>) {
        match self {
            Primitive::H | Primitive::X | Primitive::Z | Primitive::Rz => (1, Some(1)),
            Primitive::Cx | Primitive::Cz => (2, Some(2)),
            Primitive::Mcmt => (1, None),
            Primitive::Mcx => (2, None),
        }
    }

    pub fn param_count(self) -> usize {
        match self {
            Primitive::Rz => 1,
            _ => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Register {
    pub name: String,
    pub size: usize,
}

impl Register {
    pub fn new(name: impl Into<String>, size: usize) -> Self {
        Self {
            name: name.into(),
            size,
        }
    }
}

/// A qubit or classical-bit operand.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum QubitRef {
    /// Formal parameter inside a gate body, e.g. `_gate_q_0`.
    Formal(String),
    /// Register element at top level, e.g. `q[1]`.
    Indexed { register: String, index: usize },
}

impl QubitRef {
    pub fn formal(name: impl Into<String>) -> Self {
        QubitRef::Formal(name.into())
    }

    pub fn indexed(register: impl Into<String>, index: usize) -> Self {
        QubitRef::Indexed {
            register: register.into(),
            index,
        }
    }
}

impl fmt::Display for QubitRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QubitRef::Formal(name) => f.write_str(name),
            QubitRef::Indexed { register, index } => write!(f, "{register}[{index}]"),
        }
    }
}

/// Real-valued gate argument.
#[derive(Debug, Clone, PartialEq)]
pub enum Arg {
    Value(f64),
    /// Reference to a formal parameter of the enclosing definition.
    Param(String),
}

impl fmt::Display for Arg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arg::Value(v) => write!(f, "{v}"),
            Arg::Param(name) => f.write_str(name),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateCall {
    pub name: String,
    pub args: Vec<Arg>,
    pub qubits: Vec<QubitRef>,
}

impl GateCall {
    pub fn new(name: impl Into<String>, qubits: Vec<QubitRef>) -> Self {
        Self {
            name: name.into(),
            args: Vec::new(),
            qubits,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Statement {
    GateCall(GateCall),
    Measure {
        qubit: QubitRef,
        clbit: QubitRef,
    },
    /// Parsed and printed, ignored by every consumer.
    Barrier(Vec<QubitRef>),
}

impl Statement {
    pub fn call(name: &str, qubits: Vec<QubitRef>) -> Self {
        Statement::GateCall(GateCall::new(name, qubits))
    }

    pub fn as_call(&self) -> Option<&GateCall> {
        match self {
            Statement::GateCall(call) => Some(call),
            _ => None,
        }
    }
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statement::GateCall(call) => {
                f.write_str(&call.name)?;
                if !call.args.is_empty() {
                    write!(f, "({})", join(&call.args))?;
                }
                write!(f, " {};", join(&call.qubits))
            }
            Statement::Measure { qubit, clbit } => write!(f, "{clbit} = measure {qubit};"),
            Statement::Barrier(qubits) if qubits.is_empty() => f.write_str("barrier;"),
            Statement::Barrier(qubits) => write!(f, "barrier {};", join(qubits)),
        }
    }
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateDef {
    pub name: String,
    pub params: Vec<String>,
    pub formal_qubits: Vec<String>,
    pub body: Vec<Statement>,
}

impl GateDef {
    pub fn arity(&self) -> usize {
        self.formal_qubits.len()
    }

    /// Position of a formal qubit name.
    pub fn formal_index(&self, name: &str) -> Option<usize> {
        self.formal_qubits.iter().position(|q| q == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QasmProgram {
    pub version: String,
    pub includes: Vec<String>,
    pub gate_defs: Vec<GateDef>,
    pub qubit_decl: Option<Register>,
    pub clbit_decl: Option<Register>,
    pub statements: Vec<Statement>,
}

impl QasmProgram {
    /// Header-only program with the standard include.
    pub fn new() -> Self {
        Self {
            version: VERSION.to_string(),
            includes: vec![STDGATES.to_string()],
            gate_defs: Vec::new(),
            qubit_decl: None,
            clbit_decl: None,
            statements: Vec::new(),
        }
    }

    pub fn gate_def(&self, name: &str) -> Option<&GateDef> {
        self.gate_defs.iter().find(|d| d.name == name)
    }

    pub fn num_qubits(&self) -> Option<usize> {
        self.qubit_decl.as_ref().map(|r| r.size)
    }
}

impl Default for QasmProgram {
    fn default() -> Self {
        Self::new()
    }
}

/// Removes every measurement, keeping all other statements in order.
pub fn strip_measurements(program: &QasmProgram) -> QasmProgram {
    let mut stripped = program.clone();
    stripped
        .statements
        .retain(|s| !matches!(s, Statement::Measure { .. }));
    stripped
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strip_removes_only_measurements() {
        let program = parse_program(fixtures::TWO_QUBIT_GROVER).unwrap();
        let stripped = strip_measurements(&program);
        assert_eq!(stripped.statements.len(), 4);
        assert_eq!(stripped.statements[..], program.statements[..4]);
        assert_eq!(stripped.gate_defs, program.gate_defs);
        assert_eq!(strip_measurements(&stripped), stripped);
    }

    #[test]
    fn strip_without_measurements_is_identity() {
        let program = parse_program("OPENQASM 3.0;\nqubit[1] q;\nh q[0];\n").unwrap();
        assert_eq!(strip_measurements(&program), program);
    }

    #[test]
    fn strip_measure_only_program() {
        let program =
            parse_program("OPENQASM 3.0;\nbit[1] c;\nqubit[1] q;\nc[0] = measure q[0];\n").unwrap();
        assert!(strip_measurements(&program).statements.is_empty());
    }

    #[test]
    fn statement_display() {
        let call = Statement::GateCall(GateCall {
            name: "rz".into(),
            args: vec![Arg::Value(0.5)],
            qubits: vec![QubitRef::indexed("q", 1)],
        });
        assert_eq!(call.to_string(), "rz(0.5) q[1];");
        let m = Statement::Measure {
            qubit: QubitRef::indexed("q", 0),
            clbit: QubitRef::indexed("c", 0),
        };
        assert_eq!(m.to_string(), "c[0] = measure q[0];");
    }
}
