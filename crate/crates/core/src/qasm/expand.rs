use std::collections::HashMap;
use std::fmt;

use super::{Arg, GateCall, GateDef, Primitive, QasmError, QasmProgram, QubitRef, Statement};

/// A primitive gate on concrete qubit indices.
#[derive(Debug, Clone, PartialEq)]
pub enum PrimitiveGate {
    H(usize),
    X(usize),
    Z(usize),
    Rz { angle: f64, qubit: usize },
    Cx { control: usize, target: usize },
    Cz(usize, usize),
    Mcmt(Vec<usize>),
    Mcx { controls: Vec<usize>, target: usize },
}

impl PrimitiveGate {
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            PrimitiveGate::H(q) | PrimitiveGate::X(q) | PrimitiveGate::Z(q) => vec![*q],
            PrimitiveGate::Rz { qubit, .. } => vec![*qubit],
            PrimitiveGate::Cx { control, target } => vec![*control, *target],
            PrimitiveGate::Cz(a, b) => vec![*a, *b],
            PrimitiveGate::Mcmt(qs) => qs.clone(),
            PrimitiveGate::Mcx { controls, target } => {
                let mut qs = controls.clone();
                qs.push(*target);
                qs
            }
        }
    }

    fn build(kind: Primitive, args: &[f64], qubits: Vec<usize>) -> Self {
        match kind {
            Primitive::H => PrimitiveGate::H(qubits[0]),
            Primitive::X => PrimitiveGate::X(qubits[0]),
            Primitive::Z => PrimitiveGate::Z(qubits[0]),
            Primitive::Rz => PrimitiveGate::Rz {
                angle: args[0],
                qubit: qubits[0],
            },
            Primitive::Cx => PrimitiveGate::Cx {
                control: qubits[0],
                target: qubits[1],
            },
            Primitive::Cz => PrimitiveGate::Cz(qubits[0], qubits[1]),
            Primitive::Mcmt => PrimitiveGate::Mcmt(qubits),
            Primitive::Mcx => {
                let mut controls = qubits;
                let target = controls.pop().expect("mcx has a target");
                PrimitiveGate::Mcx { controls, target }
            }
        }
    }
}

impl fmt::Display for PrimitiveGate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            PrimitiveGate::H(_) => "h",
            PrimitiveGate::X(_) => "x",
            PrimitiveGate::Z(_) => "z",
            PrimitiveGate::Rz { angle, .. } => {
                return write!(f, "rz({angle}) q[{}];", self.qubits()[0])
            }
            PrimitiveGate::Cx { .. } => "cx",
            PrimitiveGate::Cz(..) => "cz",
            PrimitiveGate::Mcmt(_) => "mcmt",
            PrimitiveGate::Mcx { .. } => "mcx",
        };
        let operands: Vec<String> = self.qubits().iter().map(|q| format!("q[{q}]")).collect();
        write!(f, "{name} {};", operands.join(", "))
    }
}

/// Flattens every top-level gate call into primitives on register indices.
/// Measurements and barriers are not gate calls and are dropped.
pub fn expand_gate_calls(program: &QasmProgram) -> Result<Vec<PrimitiveGate>, QasmError> {
    let expander = Expander::new(program)?;
    let mut out = Vec::new();
    for stmt in &program.statements {
        if let Statement::GateCall(call) = stmt {
            let qubits = call
                .qubits
                .iter()
                .map(|q| match q {
                    QubitRef::Indexed { index, .. } => Ok(*index),
                    QubitRef::Formal(name) => Err(QasmError::BadQubit {
                        reference: name.clone(),
                        reason: "formal operand outside a gate body".into(),
                        line: 0,
                    }),
                })
                .collect::<Result<Vec<_>, _>>()?;
            let args = call
                .args
                .iter()
                .map(|a| match a {
                    Arg::Value(v) => Ok(*v),
                    Arg::Param(p) => Err(QasmError::UnknownGate {
                        name: format!("unbound parameter `{p}`"),
                        line: 0,
                    }),
                })
                .collect::<Result<Vec<_>, _>>()?;
            expander.call(&call.name, &args, &qubits, &mut Vec::new(), &mut out)?;
        }
    }
    Ok(out)
}

/// Expands a single call of `name` (a definition or primitive) on the given
/// actual qubits.
pub fn expand_call(
    program: &QasmProgram,
    name: &str,
    qubits: &[usize],
) -> Result<Vec<PrimitiveGate>, QasmError> {
    let expander = Expander::new(program)?;
    let mut out = Vec::new();
    expander.call(name, &[], qubits, &mut Vec::new(), &mut out)?;
    Ok(out)
}

struct Expander<'a> {
    defs: HashMap<&'a str, &'a GateDef>,
}

impl<'a> Expander<'a> {
    fn new(program: &'a QasmProgram) -> Result<Self, QasmError> {
        let mut defs = HashMap::new();
        for def in &program.gate_defs {
            if defs.insert(def.name.as_str(), def).is_some() {
                return Err(QasmError::DuplicateDefinition(def.name.clone()));
            }
        }
        Ok(Self { defs })
    }

    fn call(
        &self,
        name: &str,
        args: &[f64],
        qubits: &[usize],
        stack: &mut Vec<String>,
        out: &mut Vec<PrimitiveGate>,
    ) -> Result<(), QasmError> {
        if let Some(def) = self.defs.get(name) {
            if stack.iter().any(|s| s == name) {
                return Err(QasmError::RecursionDetected(name.to_string()));
            }
            if def.arity() != qubits.len() || def.params.len() != args.len() {
                return Err(arity(name, def.arity(), qubits.len()));
            }
            stack.push(name.to_string());
            for stmt in &def.body {
                if let Statement::GateCall(inner) = stmt {
                    let (inner_args, inner_qubits) = bind(def, inner, args, qubits)?;
                    self.call(&inner.name, &inner_args, &inner_qubits, stack, out)?;
                }
            }
            stack.pop();
            return Ok(());
        }
        let kind = Primitive::from_name(name).ok_or_else(|| QasmError::UnknownGate {
            name: name.to_string(),
            line: 0,
        })?;
        let (min, max) = kind.qubit_arity();
        if qubits.len() < min
            || max.is_some_and(|m| qubits.len() > m)
            || args.len() != kind.param_count()
        {
            return Err(arity(name, min, qubits.len()));
        }
        out.push(PrimitiveGate::build(kind, args, qubits.to_vec()));
        Ok(())
    }
}

fn arity(name: &str, expected: usize, found: usize) -> QasmError {
    QasmError::ArityMismatch {
        name: name.to_string(),
        expected: format!("{expected} qubit(s)"),
        found: found.to_string(),
        line: 0,
    }
}

fn bind(
    def: &GateDef,
    call: &GateCall,
    args: &[f64],
    qubits: &[usize],
) -> Result<(Vec<f64>, Vec<usize>), QasmError> {
    let bound_qubits = call
        .qubits
        .iter()
        .map(|q| {
            match q {
                QubitRef::Formal(f) => def.formal_index(f).map(|i| qubits[i]),
                QubitRef::Indexed { .. } => None,
            }
            .ok_or_else(|| QasmError::BadQubit {
                reference: q.to_string(),
                reason: format!("not a formal qubit of `{}`", def.name),
                line: 0,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let bound_args = call
        .args
        .iter()
        .map(|a| match a {
            Arg::Value(v) => Ok(*v),
            Arg::Param(p) => def
                .params
                .iter()
                .position(|name| name == p)
                .map(|i| args[i])
                .ok_or_else(|| QasmError::UnknownGate {
                    name: format!("unbound parameter `{p}`"),
                    line: 0,
                }),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((bound_args, bound_qubits))
}
