//! Symbolic analysis of Grover programs: oracle extraction, block
//! segmentation, marked-state inference, the analytic output distribution and
//! the reasoning-trace text.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use regex::Regex;
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;
use thiserror::Error;

use crate::bits::{Bitstring, MAX_QUBITS};
use crate::circuits::{optimal_iterations, CircuitError, Mode};
use crate::distribution::{rank_order, Distribution};
use crate::qasm::{parse_program, QasmError, QasmProgram, QubitRef, Statement};
use crate::scalar::Real;

/// Number of entries kept in the rendered results table.
pub const RESULTS_LIMIT: usize = 30;
/// Decimal places of the rendered probabilities.
pub const RESULT_DECIMALS: i32 = 4;
/// Largest register for which the full analytic distribution is materialized.
pub const DENSE_LIMIT: usize = 26;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyzeError {
    #[error("no Oracle definition found")]
    OracleNotFound,
    #[error("malformed oracle: {0}")]
    MalformedOracle(String),
    #[error("marked state {0} appears in more than one block")]
    DuplicateMarkedState(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("malformed trace at line {line}: {message}")]
    TraceSyntax { line: usize, message: String },
    #[error(transparent)]
    Qasm(#[from] QasmError),
}

impl From<CircuitError> for AnalyzeError {
    fn from(err: CircuitError) -> Self {
        AnalyzeError::Domain(err.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Parse,
    Extract,
    Segment,
    Infer,
    Analytic,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Parse => "parse",
            Stage::Extract => "extract",
            Stage::Segment => "segment",
            Stage::Infer => "infer",
            Stage::Analytic => "analytic",
        })
    }
}

/// An analysis error tagged with the pipeline stage that raised it.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{stage} stage: {error}")]
pub struct AnalysisFailure {
    pub stage: Stage,
    #[source]
    pub error: AnalyzeError,
}

trait AtStage<T> {
    fn at(self, stage: Stage) -> Result<T, AnalysisFailure>;
}

impl<T, E: Into<AnalyzeError>> AtStage<T> for Result<T, E> {
    fn at(self, stage: Stage) -> Result<T, AnalysisFailure> {
        self.map_err(|e| AnalysisFailure {
            stage,
            error: e.into(),
        })
    }
}

/// Body of the oracle definition, in formal-qubit form.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleEntity {
    pub name: String,
    pub formal_qubits: Vec<String>,
    pub statements: Vec<Statement>,
}

impl OracleEntity {
    pub fn n(&self) -> usize {
        self.formal_qubits.len()
    }

    pub fn lines(&self) -> Vec<String> {
        self.statements.iter().map(ToString::to_string).collect()
    }

    fn qubit_index(&self, qubit: &QubitRef) -> Result<usize, AnalyzeError> {
        match qubit {
            QubitRef::Formal(name) => self
                .formal_qubits
                .iter()
                .position(|f| f == name)
                .ok_or_else(|| AnalyzeError::MalformedOracle(format!("unknown qubit {name}"))),
            other => Err(AnalyzeError::MalformedOracle(format!(
                "oracle body references register element {other}"
            ))),
        }
    }
}

/// Finds the oracle: the definition named `Oracle`, or in oracle-only mode
/// the sole definition of the program. Only `x` and `mcmt` may appear.
pub fn extract_oracle(program: &QasmProgram, mode: Mode) -> Result<OracleEntity, AnalyzeError> {
    let def = match (program.gate_def("Oracle"), mode) {
        (Some(def), _) => def,
        (None, Mode::OracleOnly) if program.gate_defs.len() == 1 => &program.gate_defs[0],
        _ => return Err(AnalyzeError::OracleNotFound),
    };
    let mut has_mcmt = false;
    for stmt in &def.body {
        let call = stmt.as_call().ok_or_else(|| {
            AnalyzeError::MalformedOracle(format!("unexpected statement `{stmt}`"))
        })?;
        match call.name.as_str() {
            "x" => {}
            "mcmt" => has_mcmt = true,
            other => {
                return Err(AnalyzeError::MalformedOracle(format!(
                    "gate `{other}` is not allowed in an oracle"
                )))
            }
        }
    }
    if !has_mcmt {
        return Err(AnalyzeError::MalformedOracle("no mcmt statement".into()));
    }
    Ok(OracleEntity {
        name: def.name.clone(),
        formal_qubits: def.formal_qubits.clone(),
        statements: def.body.clone(),
    })
}

/// One marked-state block: X-conjugation set around an `mcmt`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkBlock {
    pub pre_x: BTreeSet<usize>,
    pub mcmt_args: Vec<usize>,
    pub post_x: BTreeSet<usize>,
    /// Source statements, pre-x then mcmt then post-x.
    pub statements: Vec<Statement>,
}

fn x_set(entity: &OracleEntity, stmts: &[Statement]) -> Result<BTreeSet<usize>, AnalyzeError> {
    let mut set = BTreeSet::new();
    for stmt in stmts {
        let q = entity.qubit_index(&stmt.as_call().expect("checked by extract").qubits[0])?;
        if !set.insert(q) {
            return Err(AnalyzeError::MalformedOracle(format!(
                "qubit {q} flipped twice on one side of an mcmt"
            )));
        }
    }
    Ok(set)
}

/// Splits the oracle at each `mcmt`. The x run after an `mcmt` first closes
/// the current block (same set as its opening run) and the remainder opens the
/// next one.
pub fn segment_blocks(entity: &OracleEntity) -> Result<Vec<MarkBlock>, AnalyzeError> {
    let n = entity.n();
    let mut blocks = Vec::new();
    let mut pending: Vec<Statement> = Vec::new();
    let mut open: Option<(Vec<Statement>, Statement)> = None;

    let close = |pre: Vec<Statement>,
                 mcmt: Statement,
                 post: Vec<Statement>|
     -> Result<MarkBlock, AnalyzeError> {
        let pre_x = x_set(entity, &pre)?;
        let post_x = x_set(entity, &post)?;
        if pre_x != post_x {
            return Err(AnalyzeError::MalformedOracle(format!(
                "x gates before mcmt {pre_x:?} do not match those after {post_x:?}"
            )));
        }
        let mcmt_args = mcmt
            .as_call()
            .expect("checked by extract")
            .qubits
            .iter()
            .map(|q| entity.qubit_index(q))
            .collect::<Result<Vec<_>, _>>()?;
        let covered: BTreeSet<usize> = mcmt_args.iter().copied().collect();
        if covered.len() != n || mcmt_args.len() != n {
            return Err(AnalyzeError::MalformedOracle(format!(
                "mcmt must act on all {n} qubits, got {}",
                mcmt_args.len()
            )));
        }
        let mut statements = pre;
        statements.push(mcmt);
        statements.extend(post);
        Ok(MarkBlock {
            pre_x,
            mcmt_args,
            post_x,
            statements,
        })
    };

    let mut flush = |open: &mut Option<(Vec<Statement>, Statement)>,
                     pending: &mut Vec<Statement>|
     -> Result<(), AnalyzeError> {
        if let Some((pre, mcmt)) = open.take() {
            if pending.len() < pre.len() {
                return Err(AnalyzeError::MalformedOracle(
                    "missing x gates after mcmt".into(),
                ));
            }
            let rest = pending.split_off(pre.len());
            let post = std::mem::replace(pending, rest);
            blocks.push(close(pre, mcmt, post)?);
        }
        Ok(())
    };

    for stmt in &entity.statements {
        match stmt.as_call().map(|c| c.name.as_str()) {
            Some("mcmt") => {
                flush(&mut open, &mut pending)?;
                open = Some((std::mem::take(&mut pending), stmt.clone()));
            }
            _ => pending.push(stmt.clone()),
        }
    }
    flush(&mut open, &mut pending)?;
    if !pending.is_empty() {
        return Err(AnalyzeError::MalformedOracle(format!(
            "{} trailing x statement(s) after the last block",
            pending.len()
        )));
    }
    Ok(blocks)
}

/// One line of the state construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub qubit: usize,
    pub formal: String,
    pub present: bool,
    pub bit: char,
    pub accumulated: String,
}

/// Bits are computed from qubit 0 upward and prepended, so qubit `n−1` ends
/// up leftmost.
pub fn infer_marked_state(
    block: &MarkBlock,
    formal_qubits: &[String],
) -> (Bitstring, Vec<TraceStep>) {
    let n = formal_qubits.len();
    let mut acc = String::with_capacity(n);
    let mut value = 0u64;
    let mut steps = Vec::with_capacity(n);
    for (q, formal) in formal_qubits.iter().enumerate() {
        let present = block.pre_x.contains(&q);
        let bit = if present { '0' } else { '1' };
        if !present {
            value |= 1 << q;
        }
        acc.insert(0, bit);
        steps.push(TraceStep {
            qubit: q,
            formal: formal.clone(),
            present,
            bit,
            accumulated: acc.clone(),
        });
    }
    (Bitstring::from_index(n, value), steps)
}

/// `θ = asin(√(t/N))`.
pub fn grover_angle<T: Real>(n: usize, t: usize) -> Result<T, AnalyzeError> {
    check_domain(n, t)?;
    let ratio = T::of_usize(t) / T::of(2f64.powi(n as i32));
    Ok(ratio.sqrt().asin())
}

fn check_domain(n: usize, t: usize) -> Result<(), AnalyzeError> {
    if n == 0 || n > MAX_QUBITS || t == 0 || t as u128 >= 1u128 << n {
        return Err(AnalyzeError::Domain(format!(
            "need 1 <= t < 2^n, got n={n}, t={t}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct AnalyticParams<T: Real = f64> {
    pub theta: T,
    pub k: usize,
    pub p_marked_total: T,
    pub p_marked_each: T,
    pub p_unmarked_each: T,
}

impl<T: Real> AnalyticParams<T> {
    pub fn new(n: usize, t: usize, k: usize) -> Result<Self, AnalyzeError> {
        let theta: T = grover_angle(n, t)?;
        let angle = T::of_usize(2 * k + 1) * theta;
        let p_marked_total = angle.sin().powi(2);
        let unmarked_count = T::of(2f64.powi(n as i32) - t as f64);
        Ok(Self {
            theta,
            k,
            p_marked_total,
            p_marked_each: p_marked_total / T::of_usize(t),
            p_unmarked_each: angle.cos().powi(2) / unmarked_count,
        })
    }
}

fn check_marked(n: usize, marked: &[Bitstring]) -> Result<(), AnalyzeError> {
    check_domain(n, marked.len())?;
    let mut seen = BTreeSet::new();
    for m in marked {
        if m.width() != n {
            return Err(AnalyzeError::Domain(format!(
                "marked state {m} has width {}, expected {n}",
                m.width()
            )));
        }
        if !seen.insert(m.index()) {
            return Err(AnalyzeError::DuplicateMarkedState(m.to_string()));
        }
    }
    Ok(())
}

/// Full (untruncated) analytic distribution after `k` iterations.
pub fn analytic_distribution<T: Real>(
    n: usize,
    marked: &[Bitstring],
    k: usize,
) -> Result<Distribution<T>, AnalyzeError> {
    check_marked(n, marked)?;
    if n > DENSE_LIMIT {
        return Err(AnalyzeError::Domain(format!(
            "dense analytic distribution limited to {DENSE_LIMIT} qubits"
        )));
    }
    let params = AnalyticParams::<T>::new(n, marked.len(), k)?;
    let mut probs = vec![params.p_unmarked_each; 1 << n];
    for m in marked {
        probs[m.index() as usize] = params.p_marked_each;
    }
    Ok(Distribution::from_dense(n, probs))
}

/// Half-even rounding to [`RESULT_DECIMALS`] places.
pub fn round_result(p: f64) -> f64 {
    let scale = 10f64.powi(RESULT_DECIMALS);
    (p * scale).round_ties_even() / scale
}

/// Rounded, ranked, top-`limit` table of the analytic distribution, built
/// from the two probability levels without visiting all `2^n` states.
pub fn results_table(
    n: usize,
    marked: &[Bitstring],
    params: &AnalyticParams<f64>,
    limit: usize,
) -> Distribution<f64> {
    let pm = round_result(params.p_marked_each);
    let pu = round_result(params.p_unmarked_each);
    let total: u128 = 1u128 << n;
    let marked_idx: BTreeSet<u64> = marked.iter().map(|m| m.index()).collect();
    let unmarked = || (0..).filter(|i| !marked_idx.contains(i));

    let mut entries: Vec<(Bitstring, f64)> = Vec::with_capacity(limit);
    let push_marked = |entries: &mut Vec<(Bitstring, f64)>| {
        for &i in &marked_idx {
            if entries.len() == limit {
                break;
            }
            entries.push((Bitstring::from_index(n, i), pm));
        }
    };
    let unmarked_count = total - marked_idx.len() as u128;
    let take_unmarked = |room: usize| room.min(unmarked_count.min(usize::MAX as u128) as usize);

    if pm > pu {
        push_marked(&mut entries);
        let room = take_unmarked(limit - entries.len());
        entries.extend(
            unmarked()
                .take(room)
                .map(|i| (Bitstring::from_index(n, i), pu)),
        );
    } else if pm < pu {
        let room = take_unmarked(limit);
        entries.extend(
            unmarked()
                .take(room)
                .map(|i| (Bitstring::from_index(n, i), pu)),
        );
        push_marked(&mut entries);
    } else {
        let room = (limit as u128).min(total) as u64;
        entries.extend((0..room).map(|i| (Bitstring::from_index(n, i), pm)));
    }
    entries.sort_by(rank_order);
    let truncated = (entries.len() as u128) < total;
    Distribution::from_entries(n, entries, truncated)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockTrace {
    pub lines: Vec<String>,
    pub steps: Vec<TraceStep>,
    pub final_state: Bitstring,
}

/// Everything the analysis produced. `k` is `None` only for traces read
/// back from text, which does not record the iteration count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReasoningTrace {
    pub n: usize,
    pub oracle: Vec<String>,
    pub blocks: Vec<BlockTrace>,
    pub marked: Vec<Bitstring>,
    pub k: Option<usize>,
    pub results: Distribution<f64>,
}

impl ReasoningTrace {
    pub fn t(&self) -> usize {
        self.marked.len()
    }

    /// Unrounded analytic parameters (requires `k`).
    pub fn params(&self) -> Result<AnalyticParams<f64>, AnalyzeError> {
        let k = self
            .k
            .ok_or_else(|| AnalyzeError::Domain("trace has no iteration count".into()))?;
        AnalyticParams::new(self.n, self.t(), k)
    }

    /// Unrounded full analytic distribution (requires `k`).
    pub fn analytic<T: Real>(&self) -> Result<Distribution<T>, AnalyzeError> {
        let k = self
            .k
            .ok_or_else(|| AnalyzeError::Domain("trace has no iteration count".into()))?;
        analytic_distribution(self.n, &self.marked, k)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("trace serializes")
    }
}

/// Number of top-level `oracle; Diffuser` call pairs.
fn count_iterations(program: &QasmProgram, oracle_name: &str) -> usize {
    let calls: Vec<&str> = program
        .statements
        .iter()
        .filter_map(|s| s.as_call().map(|c| c.name.as_str()))
        .collect();
    let mut k = 0;
    let mut i = 0;
    while i + 1 < calls.len() {
        if calls[i] == oracle_name && calls[i + 1] == "Diffuser" {
            k += 1;
            i += 2;
        } else {
            i += 1;
        }
    }
    k
}

/// Runs extract → segment → infer → analytic on a parsed program.
pub fn analyze(program: &QasmProgram, mode: Mode) -> Result<ReasoningTrace, AnalysisFailure> {
    let entity = extract_oracle(program, mode).at(Stage::Extract)?;
    let n = entity.n();
    if let Some(declared) = program.num_qubits() {
        if declared != n {
            return Err(AnalyzeError::MalformedOracle(format!(
                "oracle acts on {n} qubits but the register has {declared}"
            )))
            .at(Stage::Extract);
        }
    }
    let blocks = segment_blocks(&entity).at(Stage::Segment)?;

    let mut traces = Vec::with_capacity(blocks.len());
    let mut marked = Vec::with_capacity(blocks.len());
    let mut seen = BTreeSet::new();
    for block in &blocks {
        let (state, steps) = infer_marked_state(block, &entity.formal_qubits);
        if !seen.insert(state) {
            return Err(AnalyzeError::DuplicateMarkedState(state.to_string())).at(Stage::Infer);
        }
        marked.push(state);
        traces.push(BlockTrace {
            lines: block.statements.iter().map(ToString::to_string).collect(),
            steps,
            final_state: state,
        });
    }

    let k = match mode {
        Mode::Full => count_iterations(program, &entity.name),
        Mode::OracleOnly => optimal_iterations(n, marked.len()).at(Stage::Analytic)?,
    };
    let params = AnalyticParams::<f64>::new(n, marked.len(), k).at(Stage::Analytic)?;
    let results = results_table(n, &marked, &params, RESULTS_LIMIT);
    Ok(ReasoningTrace {
        n,
        oracle: entity.lines(),
        blocks: traces,
        marked,
        k: Some(k),
        results,
    })
}

/// Parses then analyzes.
pub fn analyze_text(text: &str, mode: Mode) -> Result<ReasoningTrace, AnalysisFailure> {
    let program = parse_program(text).at(Stage::Parse)?;
    analyze(&program, mode)
}

pub fn render_results(results: &Distribution<f64>) -> String {
    let mut out = String::from("{\n");
    for (state, p) in results.ranked() {
        writeln!(out, " '{state}': {p:.4},").unwrap();
    }
    if results.is_truncated() {
        out.push_str("...\n");
    }
    out.push('}');
    out
}

pub fn render_trace(trace: &ReasoningTrace) -> String {
    let mut out = String::new();
    out.push_str("=== Analysis ===\n\nThe Oracle entity is extracted below:\n");
    for line in &trace.oracle {
        writeln!(out, "  {line}").unwrap();
    }
    for (i, block) in trace.blocks.iter().enumerate() {
        writeln!(out, "\n=== Block {} ===\nOperation sequence:", i + 1).unwrap();
        for line in &block.lines {
            writeln!(out, "{line}").unwrap();
        }
        out.push_str("State construction:\n");
        for step in &block.steps {
            let (word, bit) = if step.present {
                ("Present", '0')
            } else {
                ("Absent", '1')
            };
            writeln!(
                out,
                "x {}: {word} → {bit}, then → {}",
                step.formal, step.accumulated
            )
            .unwrap();
        }
        writeln!(out, "Final state: {}", block.final_state).unwrap();
    }
    out.push_str("\n=== Final Marked States ===\n");
    for state in &trace.marked {
        writeln!(out, "{state}").unwrap();
    }
    out.push_str("\n=== Results ===\n");
    out.push_str(&render_results(&trace.results));
    out.push('\n');
    out
}

fn step_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^x (\S+): (Present|Absent) → ([01]), then → ([01]+)$").unwrap())
}

fn result_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^ '([01]+)': ([0-9]+\.[0-9]+),$").unwrap())
}

struct Lines<'a> {
    inner: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            inner: text.lines().enumerate().peekable(),
        }
    }

    fn err<T>(&mut self, message: impl Into<String>) -> Result<T, AnalyzeError> {
        let line = self.inner.peek().map_or(0, |(i, _)| i + 1);
        Err(AnalyzeError::TraceSyntax {
            line,
            message: message.into(),
        })
    }

    fn peek(&mut self) -> Option<&'a str> {
        self.inner.peek().map(|(_, l)| *l)
    }

    fn next(&mut self) -> Option<&'a str> {
        self.inner.next().map(|(_, l)| l)
    }

    fn skip_blank(&mut self) {
        while self.peek().is_some_and(|l| l.trim().is_empty()) {
            self.next();
        }
    }

    fn expect(&mut self, wanted: &str) -> Result<(), AnalyzeError> {
        self.skip_blank();
        match self.peek() {
            Some(l) if l.trim_end() == wanted => {
                self.next();
                Ok(())
            }
            Some(l) => {
                let msg = format!("expected `{wanted}`, found `{l}`");
                self.err(msg)
            }
            None => self.err(format!("expected `{wanted}`, found end of text")),
        }
    }
}

fn parse_bits(lines: &mut Lines<'_>, text: &str) -> Result<Bitstring, AnalyzeError> {
    match text.parse::<Bitstring>() {
        Ok(b) => Ok(b),
        Err(e) => lines.err(e.to_string()),
    }
}

/// Reads back text produced by [`render_trace`]. The iteration count is not
/// part of the text, so the result has `k = None`.
pub fn parse_trace(text: &str) -> Result<ReasoningTrace, AnalyzeError> {
    let mut lines = Lines::new(text);
    lines.expect("=== Analysis ===")?;
    lines.expect("The Oracle entity is extracted below:")?;
    let mut oracle = Vec::new();
    while let Some(l) = lines.peek() {
        match l.strip_prefix("  ") {
            Some(stmt) => {
                oracle.push(stmt.to_string());
                lines.next();
            }
            None => break,
        }
    }

    let mut blocks = Vec::new();
    loop {
        lines.skip_blank();
        let Some(header) = lines.peek() else { break };
        if header != format!("=== Block {} ===", blocks.len() + 1) {
            break;
        }
        lines.next();
        lines.expect("Operation sequence:")?;
        let mut stmt_lines = Vec::new();
        while let Some(l) = lines.peek() {
            if l == "State construction:" {
                break;
            }
            stmt_lines.push(l.to_string());
            lines.next();
        }
        lines.expect("State construction:")?;
        let mut steps = Vec::new();
        while let Some(caps) = lines.peek().and_then(|l| step_regex().captures(l)) {
            let present = &caps[2] == "Present";
            let bit = caps[3].chars().next().unwrap();
            if bit != if present { '0' } else { '1' } {
                return lines.err("bit disagrees with Present/Absent");
            }
            steps.push(TraceStep {
                qubit: steps.len(),
                formal: caps[1].to_string(),
                present,
                bit,
                accumulated: caps[4].to_string(),
            });
            lines.next();
        }
        let final_state = match lines.peek().and_then(|l| l.strip_prefix("Final state: ")) {
            Some(bits) => parse_bits(&mut lines, bits)?,
            None => return lines.err("expected `Final state: <bits>`"),
        };
        lines.next();
        blocks.push(BlockTrace {
            lines: stmt_lines,
            steps,
            final_state,
        });
    }

    lines.expect("=== Final Marked States ===")?;
    let mut marked = Vec::new();
    while let Some(l) = lines.peek() {
        if l.trim().is_empty() {
            break;
        }
        marked.push(parse_bits(&mut lines, l.trim())?);
        lines.next();
    }

    lines.expect("=== Results ===")?;
    lines.expect("{")?;
    let mut entries = Vec::new();
    let mut truncated = false;
    loop {
        let Some(l) = lines.peek() else {
            return lines.err("unterminated results block");
        };
        if l == "}" {
            lines.next();
            break;
        }
        if l == "..." {
            truncated = true;
        } else if let Some(caps) = result_regex().captures(l) {
            let state = parse_bits(&mut lines, &caps[1])?;
            let p: f64 = caps[2].parse().expect("regex admits only decimals");
            entries.push((state, p));
        } else {
            let msg = format!("bad results line `{l}`");
            return lines.err(msg);
        }
        lines.next();
    }
    lines.skip_blank();
    if lines.peek().is_some() {
        return lines.err("unexpected text after results");
    }

    let n = marked
        .first()
        .or(entries.first().map(|(b, _)| b))
        .map(Bitstring::width)
        .or_else(|| oracle.is_empty().then_some(0))
        .unwrap_or(0);
    if entries.iter().any(|(b, _)| b.width() != n) || marked.iter().any(|b| b.width() != n) {
        return Err(AnalyzeError::TraceSyntax {
            line: 0,
            message: "bitstrings of different widths".into(),
        });
    }
    Ok(ReasoningTrace {
        n,
        oracle,
        blocks,
        marked,
        k: None,
        results: Distribution::from_entries(n, entries, truncated),
    })
}
