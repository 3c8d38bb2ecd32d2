use std::fmt::Write;

use super::QasmProgram;

/// Canonical text: header, includes, a blank line, definitions with
/// two-space bodies, declarations (bits first), then one statement per line.
pub fn print_program(program: &QasmProgram) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "OPENQASM {};", program.version);
    for include in &program.includes {
        let _ = writeln!(out, "include \"{include}\";");
    }
    out.push('\n');
    for def in &program.gate_defs {
        out.push_str("gate ");
        out.push_str(&def.name);
        if !def.params.is_empty() {
            let _ = write!(out, "({})", def.params.join(", "));
        }
        let _ = writeln!(out, " {} {{", def.formal_qubits.join(", "));
        for stmt in &def.body {
            let _ = writeln!(out, "  {stmt}");
        }
        out.push_str("}\n");
    }
    if let Some(c) = &program.clbit_decl {
        let _ = writeln!(out, "bit[{}] {};", c.size, c.name);
    }
    if let Some(q) = &program.qubit_decl {
        let _ = writeln!(out, "qubit[{}] {};", q.size, q.name);
    }
    for stmt in &program.statements {
        let _ = writeln!(out, "{stmt}");
    }
    out
}
