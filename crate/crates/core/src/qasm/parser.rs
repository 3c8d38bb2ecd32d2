use std::collections::{HashMap, HashSet};

use super::lexer::{lex, Spanned, Tok};
use super::{
    Arg, GateCall, GateDef, Primitive, QasmError, QasmProgram, QubitRef, Register, Statement,
};

/// Parses program text. Comments and blank lines are skipped; anything
/// outside the supported subset is an error.
pub fn parse_program(text: &str) -> Result<QasmProgram, QasmError> {
    let toks = lex(text)?;
    let (end_line, end_column) = end_position(text);
    Parser {
        toks,
        pos: 0,
        end_line,
        end_column,
        signatures: HashMap::new(),
        program: QasmProgram {
            version: String::new(),
            includes: Vec::new(),
            gate_defs: Vec::new(),
            qubit_decl: None,
            clbit_decl: None,
            statements: Vec::new(),
        },
    }
    .run()
}

fn end_position(text: &str) -> (usize, usize) {
    let line = text.lines().count().max(1);
    let column = text.lines().last().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

#[derive(Clone, Copy)]
struct Signature {
    qubits: (usize, Option<usize>),
    params: usize,
}

enum Expr {
    Const(f64),
    Param(String),
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    end_line: usize,
    end_column: usize,
    /// User definitions seen so far.
    signatures: HashMap<String, Signature>,
    program: QasmProgram,
}

impl Parser {
    fn run(mut self) -> Result<QasmProgram, QasmError> {
        self.header()?;
        while self.pos < self.toks.len() {
            self.item()?;
        }
        Ok(self.program)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn peek_at(&self, offset: usize) -> Option<&Tok> {
        self.toks.get(self.pos + offset).map(|s| &s.tok)
    }

    fn position(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map_or((self.end_line, self.end_column), |s| (s.line, s.column))
    }

    fn line(&self) -> usize {
        self.position().0
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, QasmError> {
        let (line, column) = self.position();
        Err(QasmError::Syntax {
            line,
            column,
            message: message.into(),
        })
    }

    fn describe(&self) -> String {
        match self.peek() {
            None => "end of input".into(),
            Some(Tok::Ident(s)) => format!("`{s}`"),
            Some(Tok::Number(s)) => format!("number `{s}`"),
            Some(Tok::Str(s)) => format!("string \"{s}\""),
            Some(Tok::Punct(c)) => format!("`{c}`"),
            Some(Tok::Arrow) => "`->`".into(),
        }
    }

    fn bump(&mut self) -> Option<Tok> {
        let tok = self.toks.get(self.pos).map(|s| s.tok.clone());
        self.pos += 1;
        tok
    }

    fn eat_punct(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Punct(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, c: char) -> Result<(), QasmError> {
        if self.eat_punct(c) {
            Ok(())
        } else {
            self.error(format!("expected `{c}`, found {}", self.describe()))
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<String, QasmError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.error(format!("expected {what}, found {}", self.describe())),
        }
    }

    fn expect_keyword(&mut self, keyword: &str) -> Result<(), QasmError> {
        match self.peek() {
            Some(Tok::Ident(s)) if s == keyword => {
                self.pos += 1;
                Ok(())
            }
            _ => self.error(format!("expected `{keyword}`, found {}", self.describe())),
        }
    }

    fn expect_index(&mut self) -> Result<usize, QasmError> {
        match self.peek() {
            Some(Tok::Number(s)) if s.chars().all(|c| c.is_ascii_digit()) => {
                let value = s.parse().or_else(|_| self.error("index too large"))?;
                self.pos += 1;
                Ok(value)
            }
            _ => self.error(format!("expected integer, found {}", self.describe())),
        }
    }

    fn header(&mut self) -> Result<(), QasmError> {
        match self.peek() {
            Some(Tok::Ident(s)) if s == "OPENQASM" => self.pos += 1,
            _ => {
                return self.error(format!(
                    "expected `OPENQASM` version header, found {}",
                    self.describe()
                ))
            }
        }
        match self.bump() {
            Some(Tok::Number(v)) => self.program.version = v,
            _ => {
                self.pos -= 1;
                return self.error("expected version number after `OPENQASM`");
            }
        }
        self.expect_punct(';')
    }

    fn item(&mut self) -> Result<(), QasmError> {
        let keyword = match self.peek() {
            Some(Tok::Ident(s)) => s.clone(),
            _ => return self.error(format!("expected statement, found {}", self.describe())),
        };
        match keyword.as_str() {
            "OPENQASM" => self.error("duplicate version header"),
            "include" => {
                self.pos += 1;
                match self.bump() {
                    Some(Tok::Str(s)) => self.program.includes.push(s),
                    _ => {
                        self.pos -= 1;
                        return self.error("expected quoted file name after `include`");
                    }
                }
                self.expect_punct(';')
            }
            "gate" => self.gate_def(),
            "qubit" | "bit" => self.declaration(keyword == "qubit"),
            "measure" => {
                self.pos += 1;
                let line = self.line();
                let qubit = self.top_level_qubit()?;
                if self.peek() != Some(&Tok::Arrow) {
                    return self.error(format!("expected `->`, found {}", self.describe()));
                }
                self.pos += 1;
                let clbit = self.clbit(line)?;
                self.expect_punct(';')?;
                self.program
                    .statements
                    .push(Statement::Measure { qubit, clbit });
                Ok(())
            }
            "barrier" => {
                self.pos += 1;
                let mut qubits = Vec::new();
                if !self.eat_punct(';') {
                    qubits.push(self.top_level_qubit()?);
                    while self.eat_punct(',') {
                        qubits.push(self.top_level_qubit()?);
                    }
                    self.expect_punct(';')?;
                }
                self.program.statements.push(Statement::Barrier(qubits));
                Ok(())
            }
            _ if self.peek_at(1) == Some(&Tok::Punct('[')) => {
                // c[i] = measure q[j];
                let line = self.line();
                let clbit = self.clbit(line)?;
                self.expect_punct('=')?;
                self.expect_keyword("measure")?;
                let qubit = self.top_level_qubit()?;
                self.expect_punct(';')?;
                self.program
                    .statements
                    .push(Statement::Measure { qubit, clbit });
                Ok(())
            }
            _ => {
                let call = self.gate_call(None)?;
                self.program.statements.push(Statement::GateCall(call));
                Ok(())
            }
        }
    }

    fn declaration(&mut self, quantum: bool) -> Result<(), QasmError> {
        self.pos += 1;
        self.expect_punct('[')?;
        let size = self.expect_index()?;
        self.expect_punct(']')?;
        let name = self.expect_ident("register name")?;
        self.expect_punct(';')?;
        if size == 0 {
            self.pos -= 1;
            return self.error("register size must be positive");
        }
        let slot = if quantum {
            &mut self.program.qubit_decl
        } else {
            &mut self.program.clbit_decl
        };
        if slot.is_some() {
            self.pos -= 1;
            return self.error("only one register of each kind is supported");
        }
        *slot = Some(Register::new(name, size));
        Ok(())
    }

    fn gate_def(&mut self) -> Result<(), QasmError> {
        self.pos += 1;
        let name = self.expect_ident("gate name")?;
        let mut params = Vec::new();
        if self.eat_punct('(') && !self.eat_punct(')') {
            params.push(self.expect_ident("parameter name")?);
            while self.eat_punct(',') {
                params.push(self.expect_ident("parameter name")?);
            }
            self.expect_punct(')')?;
        }
        let mut formal_qubits = vec![self.expect_ident("qubit name")?];
        while self.eat_punct(',') {
            formal_qubits.push(self.expect_ident("qubit name")?);
        }
        let unique: HashSet<&String> = formal_qubits.iter().chain(params.iter()).collect();
        if unique.len() != formal_qubits.len() + params.len() {
            return self.error(format!("repeated formal name in definition of `{name}`"));
        }
        if self.signatures.contains_key(&name) {
            return Err(QasmError::DuplicateDefinition(name));
        }
        self.expect_punct('{')?;

        let mut def = GateDef {
            name: name.clone(),
            params,
            formal_qubits,
            body: Vec::new(),
        };
        while !self.eat_punct('}') {
            if self.peek().is_none() {
                return self.error(format!("unterminated body of gate `{name}`"));
            }
            if self.peek() == Some(&Tok::Ident("barrier".into())) {
                self.pos += 1;
                let mut qubits = Vec::new();
                if !self.eat_punct(';') {
                    qubits.push(self.formal_qubit(&def)?);
                    while self.eat_punct(',') {
                        qubits.push(self.formal_qubit(&def)?);
                    }
                    self.expect_punct(';')?;
                }
                def.body.push(Statement::Barrier(qubits));
                continue;
            }
            let call = self.gate_call(Some(&def))?;
            def.body.push(Statement::GateCall(call));
        }
        self.signatures.insert(
            name,
            Signature {
                qubits: (def.arity(), Some(def.arity())),
                params: def.params.len(),
            },
        );
        self.program.gate_defs.push(def);
        Ok(())
    }

    fn gate_call(&mut self, scope: Option<&GateDef>) -> Result<GateCall, QasmError> {
        let line = self.line();
        let name = self.expect_ident("gate name")?;
        if scope.is_some_and(|def| def.name == name) {
            return Err(QasmError::RecursionDetected(name));
        }
        let signature = match self.signatures.get(&name) {
            Some(sig) => *sig,
            None => match Primitive::from_name(&name) {
                Some(p) => Signature {
                    qubits: p.qubit_arity(),
                    params: p.param_count(),
                },
                None => return Err(QasmError::UnknownGate { name, line }),
            },
        };

        let mut args = Vec::new();
        if self.eat_punct('(') && !self.eat_punct(')') {
            args.push(self.argument(scope)?);
            while self.eat_punct(',') {
                args.push(self.argument(scope)?);
            }
            self.expect_punct(')')?;
        }

        let mut qubits = Vec::new();
        loop {
            qubits.push(match scope {
                Some(def) => self.formal_qubit(def)?,
                None => self.top_level_qubit()?,
            });
            if !self.eat_punct(',') {
                break;
            }
        }
        self.expect_punct(';')?;

        if args.len() != signature.params {
            return Err(QasmError::ArityMismatch {
                name,
                expected: format!("{} parameter(s)", signature.params),
                found: format!("{}", args.len()),
                line,
            });
        }
        let (min, max) = signature.qubits;
        if qubits.len() < min || max.is_some_and(|m| qubits.len() > m) {
            let expected = match max {
                Some(m) if m == min => format!("{min} qubit(s)"),
                Some(m) => format!("{min}..={m} qubits"),
                None => format!("at least {min} qubit(s)"),
            };
            return Err(QasmError::ArityMismatch {
                name,
                expected,
                found: format!("{}", qubits.len()),
                line,
            });
        }
        let distinct: HashSet<&QubitRef> = qubits.iter().collect();
        if distinct.len() != qubits.len() {
            return Err(QasmError::BadQubit {
                reference: qubits
                    .iter()
                    .map(ToString::to_string)
                    .collect::<Vec<_>>()
                    .join(", "),
                reason: format!("repeated operand in call to `{name}`"),
                line,
            });
        }
        Ok(GateCall { name, args, qubits })
    }

    fn formal_qubit(&mut self, def: &GateDef) -> Result<QubitRef, QasmError> {
        let line = self.line();
        let name = self.expect_ident("qubit name")?;
        if def.formal_index(&name).is_none() {
            return Err(QasmError::BadQubit {
                reference: name,
                reason: format!("not a formal qubit of `{}`", def.name),
                line,
            });
        }
        if self.peek() == Some(&Tok::Punct('[')) {
            return self.error("indexed operands are not allowed inside gate bodies");
        }
        Ok(QubitRef::Formal(name))
    }

    fn indexed_ref(&mut self) -> Result<(String, usize, usize), QasmError> {
        let line = self.line();
        let register = self.expect_ident("register name")?;
        self.expect_punct('[')?;
        let index = self.expect_index()?;
        self.expect_punct(']')?;
        Ok((register, index, line))
    }

    fn top_level_qubit(&mut self) -> Result<QubitRef, QasmError> {
        let (register, index, line) = self.indexed_ref()?;
        check_register(self.program.qubit_decl.as_ref(), &register, index, line)?;
        Ok(QubitRef::Indexed { register, index })
    }

    fn clbit(&mut self, line: usize) -> Result<QubitRef, QasmError> {
        let (register, index, _) = self.indexed_ref()?;
        check_register(self.program.clbit_decl.as_ref(), &register, index, line)?;
        Ok(QubitRef::Indexed { register, index })
    }

    fn argument(&mut self, scope: Option<&GateDef>) -> Result<Arg, QasmError> {
        match self.expr(scope)? {
            Expr::Const(v) => Ok(Arg::Value(v)),
            Expr::Param(p) => Ok(Arg::Param(p)),
        }
    }

    fn expr(&mut self, scope: Option<&GateDef>) -> Result<Expr, QasmError> {
        let mut lhs = self.term(scope)?;
        loop {
            let op = match self.peek() {
                Some(Tok::Punct(c @ ('+' | '-'))) => *c,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term(scope)?;
            lhs = self.fold(lhs, rhs, op)?;
        }
    }

    fn term(&mut self, scope: Option<&GateDef>) -> Result<Expr, QasmError> {
        let mut lhs = self.unary(scope)?;
        loop {
            let op = match self.peek() {
                Some(Tok::Punct(c @ ('*' | '/'))) => *c,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary(scope)?;
            lhs = self.fold(lhs, rhs, op)?;
        }
    }

    fn unary(&mut self, scope: Option<&GateDef>) -> Result<Expr, QasmError> {
        if self.eat_punct('-') {
            return match self.unary(scope)? {
                Expr::Const(v) => Ok(Expr::Const(-v)),
                Expr::Param(_) => self.error("parameter expressions are not supported"),
            };
        }
        match self.peek().cloned() {
            Some(Tok::Number(text)) => {
                let value = text
                    .parse::<f64>()
                    .or_else(|_| self.error(format!("malformed number `{text}`")))?;
                self.pos += 1;
                Ok(Expr::Const(value))
            }
            Some(Tok::Ident(name)) if name == "pi" => {
                self.pos += 1;
                Ok(Expr::Const(std::f64::consts::PI))
            }
            Some(Tok::Ident(name)) if scope.is_some_and(|d| d.params.contains(&name)) => {
                self.pos += 1;
                Ok(Expr::Param(name))
            }
            Some(Tok::Punct('(')) => {
                self.pos += 1;
                let inner = self.expr(scope)?;
                self.expect_punct(')')?;
                Ok(inner)
            }
            _ => self.error(format!("expected gate argument, found {}", self.describe())),
        }
    }

    fn fold(&self, lhs: Expr, rhs: Expr, op: char) -> Result<Expr, QasmError> {
        match (lhs, rhs) {
            (Expr::Const(a), Expr::Const(b)) => Ok(Expr::Const(match op {
                '+' => a + b,
                '-' => a - b,
                '*' => a * b,
                _ => a / b,
            })),
            _ => self.error("parameter expressions are not supported"),
        }
    }
}

fn check_register(
    decl: Option<&Register>,
    register: &str,
    index: usize,
    line: usize,
) -> Result<(), QasmError> {
    let reference = format!("{register}[{index}]");
    match decl {
        None => Err(QasmError::BadQubit {
            reference,
            reason: "register used before declaration".into(),
            line,
        }),
        Some(decl) if decl.name != register => Err(QasmError::BadQubit {
            reference,
            reason: format!("undeclared register (declared: `{}`)", decl.name),
            line,
        }),
        Some(decl) if index >= decl.size => Err(QasmError::BadQubit {
            reference,
            reason: format!("index out of range for size {}", decl.size),
            line,
        }),
        Some(_) => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qasm::fixtures::TWO_QUBIT_GROVER;

    #[test]
    fn parses_two_qubit_listing() {
        let p = parse_program(TWO_QUBIT_GROVER).unwrap();
        assert_eq!(p.version, "3.0");
        assert_eq!(p.includes, ["stdgates.inc"]);
        let names: Vec<&str> = p.gate_defs.iter().map(|d| d.name.as_str()).collect();
        assert_eq!(names, ["mcmt", "Oracle", "Diffuser"]);
        assert_eq!(p.qubit_decl, Some(Register::new("q", 2)));
        assert_eq!(p.clbit_decl, Some(Register::new("c", 2)));
        assert_eq!(p.statements.len(), 6);
        let measures = p
            .statements
            .iter()
            .filter(|s| matches!(s, Statement::Measure { .. }))
            .count();
        assert_eq!(measures, 2);
        assert_eq!(p.gate_def("Diffuser").unwrap().body.len(), 11);
    }

    #[test]
    fn parses_minimal_program() {
        let p = parse_program("OPENQASM 3.0;\ninclude \"stdgates.inc\";\nqubit[1] q;\nh q[0];")
            .unwrap();
        assert!(p.gate_defs.is_empty());
        assert_eq!(
            p.statements,
            vec![Statement::call("h", vec![QubitRef::indexed("q", 0)])]
        );
    }

    #[test]
    fn garbage_is_a_syntax_error() {
        assert!(matches!(
            parse_program("foo bar"),
            Err(QasmError::Syntax {
                line: 1,
                column: 1,
                ..
            })
        ));
    }

    #[test]
    fn error_positions_point_at_offending_token() {
        let err = parse_program("OPENQASM 3.0;\nqubit[2] q;\nh q[0]\nx q[1];").unwrap_err();
        assert_eq!(
            err,
            QasmError::Syntax {
                line: 4,
                column: 1,
                message: "expected `;`, found `x`".into()
            }
        );
    }

    #[test]
    fn unknown_gate_and_arity() {
        assert_eq!(
            parse_program("OPENQASM 3.0;\nqubit[2] q;\nfoo q[0];").unwrap_err(),
            QasmError::UnknownGate {
                name: "foo".into(),
                line: 3
            }
        );
        assert!(matches!(
            parse_program("OPENQASM 3.0;\nqubit[2] q;\ncx q[0];"),
            Err(QasmError::ArityMismatch { .. })
        ));
        assert!(matches!(
            parse_program("OPENQASM 3.0;\nqubit[2] q;\nrz q[0];"),
            Err(QasmError::ArityMismatch { .. })
        ));
        assert!(matches!(
            parse_program("OPENQASM 3.0;\ngate g a, b {\n  h a;\n}\nqubit[2] q;\ng q[0];"),
            Err(QasmError::ArityMismatch { .. })
        ));
    }

    #[test]
    fn calls_must_reference_earlier_definitions() {
        let text = "OPENQASM 3.0;\ngate a x0 {\n  b x0;\n}\ngate b x0 {\n  h x0;\n}\n";
        assert!(matches!(
            parse_program(text),
            Err(QasmError::UnknownGate { name, .. }) if name == "b"
        ));
    }

    #[test]
    fn self_reference_is_recursion() {
        let text = "OPENQASM 3.0;\ngate g a {\n  g a;\n}\n";
        assert_eq!(
            parse_program(text).unwrap_err(),
            QasmError::RecursionDetected("g".into())
        );
    }

    #[test]
    fn qubit_checks() {
        for text in [
            "OPENQASM 3.0;\nqubit[2] q;\nh q[2];",
            "OPENQASM 3.0;\nqubit[2] q;\nh r[0];",
            "OPENQASM 3.0;\nh q[0];",
            "OPENQASM 3.0;\nqubit[2] q;\ncx q[1], q[1];",
            "OPENQASM 3.0;\ngate g a {\n  h b;\n}\n",
        ] {
            assert!(
                matches!(parse_program(text), Err(QasmError::BadQubit { .. })),
                "{text}"
            );
        }
    }

    #[test]
    fn duplicate_definition() {
        let text = "OPENQASM 3.0;\ngate g a {\n  h a;\n}\ngate g a {\n  x a;\n}\n";
        assert_eq!(
            parse_program(text).unwrap_err(),
            QasmError::DuplicateDefinition("g".into())
        );
    }

    #[test]
    fn arguments_and_alternate_measure() {
        let text = "OPENQASM 3.0;\ngate r(theta) a {\n  rz(theta) a;\n}\nqubit[1] q;\nbit[1] c;\nrz(-pi/2) q[0];\nr(0.25) q[0];\nmeasure q[0] -> c[0];\nbarrier q[0];\n";
        let p = parse_program(text).unwrap();
        let rz = p.statements[0].as_call().unwrap();
        assert_eq!(rz.args, vec![Arg::Value(-std::f64::consts::FRAC_PI_2)]);
        assert_eq!(
            p.gate_defs[0].body[0].as_call().unwrap().args,
            vec![Arg::Param("theta".into())]
        );
        assert!(matches!(p.statements[2], Statement::Measure { .. }));
        assert!(matches!(p.statements[3], Statement::Barrier(_)));
    }

    #[test]
    fn comments_and_blank_lines_skipped() {
        let text = "// leading\nOPENQASM 3.0;\n\n\nqubit[1] q; /* inline */\n\nh q[0]; // x\n";
        assert_eq!(parse_program(text).unwrap().statements.len(), 1);
    }
}
