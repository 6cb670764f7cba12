//! Scenario files: a flat, sectioned `key = value` format.
//!
//! ```text
//! name = example2
//! description = switched system, spoiled by switching
//!
//! [switching]
//! levels = 0..1:0, 1..3:10, 3..4.5:0, 4.5..inf:10
//!
//! [system_a]
//! a2 = 1
//! a1 = base:-1 gain:1
//! a0 = base:-2 gain:2
//!
//! [constants]
//! k2 = 1
//! k1 = -2
//! k0 = 4
//!
//! [initial]
//! mode = nonrelaxed
//! t0 = 0
//! y0 = 0.6
//! dy0 = auto
//!
//! [input]
//! kind = sine
//! amplitude = -10
//! frequency = 0.5
//!
//! [simulation]
//! t_end = 6
//! h = 1e-3
//! ```
//!
//! A coefficient is an expression in `t`, a switched value `base:X gain:Y`
//! (meaning `X + Y sigma(t)` for the `[switching]` signal), or
//! `piecewise 0..1: expr; 1..inf: expr`. Numeric fields accept constant
//! expressions such as `sqrt(2)`. `#` starts a comment.

use std::fmt::{self, Write as _};
use std::path::Path;

use ltv_commute::conditions::{IcMode, Tolerances};
use ltv_commute::model::{apply_switching, Level};
use ltv_commute::sim::InputSignal;
use ltv_commute::synthesis::synth_partner;
use ltv_commute::{CommutativityConstants, Expression, LtvSystem, PiecewiseCoefficient, SwitchingSignal};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("missing key `{key}` in section [{section}]")]
    Missing { section: &'static str, key: &'static str },
    #[error("missing section [{0}]")]
    MissingSection(&'static str),
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] ltv_commute::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

type Result<T> = std::result::Result<T, ScenarioError>;

/// A coefficient as written in a scenario.
#[derive(Debug, Clone, PartialEq)]
pub enum CoefficientSpec {
    Expr(Expression),
    /// `base + gain * sigma(t)`.
    Switched { base: f64, gain: f64 },
    Piecewise(Vec<(f64, f64, Expression)>),
}

impl fmt::Display for CoefficientSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoefficientSpec::Expr(e) => write!(f, "{e}"),
            CoefficientSpec::Switched { base, gain } => write!(f, "base:{} gain:{}", num(*base), num(*gain)),
            CoefficientSpec::Piecewise(pieces) => {
                f.write_str("piecewise ")?;
                for (i, (a, b, e)) in pieces.iter().enumerate() {
                    if i > 0 {
                        f.write_str("; ")?;
                    }
                    write!(f, "{}..{}: {e}", num(*a), num(*b))?;
                }
                Ok(())
            }
        }
    }
}

/// Coefficients of a system, index = derivative order.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    pub coefficients: Vec<CoefficientSpec>,
    pub domain_start: Option<f64>,
}

impl SystemSpec {
    pub fn build(&self, switching: Option<&SwitchingSignal>) -> Result<LtvSystem> {
        let coeffs = self
            .coefficients
            .iter()
            .map(|c| build_coefficient(c, switching))
            .collect::<Result<Vec<_>>>()?;
        let mut it = coeffs.into_iter();
        let sys = match self.coefficients.len() {
            3 => {
                let (c0, c1, c2) = (it.next().unwrap(), it.next().unwrap(), it.next().unwrap());
                LtvSystem::second_order(c2, c1, c0)
            }
            2 => {
                let (c0, c1) = (it.next().unwrap(), it.next().unwrap());
                LtvSystem::first_order(c1, c0)
            }
            1 => LtvSystem::gain(it.next().unwrap()),
            n => return Err(ScenarioError::Invalid(format!("system with {n} coefficients"))),
        };
        Ok(match self.domain_start {
            Some(t) => sys.with_domain_start(t),
            None => sys,
        })
    }
}

fn build_coefficient(c: &CoefficientSpec, switching: Option<&SwitchingSignal>) -> Result<PiecewiseCoefficient> {
    Ok(match c {
        CoefficientSpec::Expr(e) => PiecewiseCoefficient::smooth(e.clone()),
        CoefficientSpec::Switched { base, gain } => {
            let s = switching.ok_or_else(|| {
                ScenarioError::Invalid("switched coefficient without a [switching] section".into())
            })?;
            apply_switching(*base, *gain, s)
        }
        CoefficientSpec::Piecewise(p) => PiecewiseCoefficient::from_pieces(p.clone())?,
    })
}

/// How the partner system is given.
#[derive(Debug, Clone, PartialEq)]
pub enum PartnerSpec {
    Constants(CommutativityConstants),
    Explicit(SystemSpec),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialDerivative {
    Value(f64),
    /// From the first row of the condition matrix at `t0`.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialSpec {
    pub mode: IcMode,
    pub t0: f64,
    pub y0: f64,
    pub dy0: InitialDerivative,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub description: String,
    pub switching: Option<Vec<Level>>,
    pub system_a: SystemSpec,
    pub partner: PartnerSpec,
    /// A partner printed elsewhere, compared against the synthesized one.
    pub reference_b: Option<SystemSpec>,
    pub reference_note: Option<String>,
    pub initial: InitialSpec,
    pub input: InputSignal,
    pub t_end: f64,
    pub h: f64,
    /// Fixed commutativity threshold; the default scales with the response.
    pub tol_sim: Option<f64>,
    pub tolerances: Tolerances,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self> {
        let doc = Document::parse(text)?;
        Scenario::from_document(&doc)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ScenarioError::Io { path: path.display().to_string(), source })?;
        Scenario::parse(&text)
    }

    pub fn switching_signal(&self) -> Result<Option<SwitchingSignal>> {
        match &self.switching {
            Some(levels) => Ok(Some(SwitchingSignal::new(levels.clone())?)),
            None => Ok(None),
        }
    }

    pub fn system_a(&self) -> Result<LtvSystem> {
        let a = self.system_a.build(self.switching_signal()?.as_ref())?;
        a.require_order(2)?;
        Ok(a)
    }

    pub fn system_b(&self) -> Result<LtvSystem> {
        match &self.partner {
            PartnerSpec::Constants(k) => Ok(synth_partner(&self.system_a()?, *k)?),
            PartnerSpec::Explicit(spec) => spec.build(self.switching_signal()?.as_ref()),
        }
    }

    pub fn reference_system(&self) -> Result<Option<LtvSystem>> {
        match &self.reference_b {
            Some(spec) => Ok(Some(spec.build(self.switching_signal()?.as_ref())?)),
            None => Ok(None),
        }
    }

    pub fn window(&self) -> (f64, f64) {
        (self.initial.t0, self.t_end)
    }

    /// Builds both systems and checks that they are defined on the window.
    pub fn validate(&self) -> Result<()> {
        let (t0, t_end) = self.window();
        if !(t0.is_finite() && t_end.is_finite() && t0 < t_end) {
            return Err(ScenarioError::Invalid(format!("need t0 < t_end, got t0 = {t0}, t_end = {t_end}")));
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(ScenarioError::Invalid(format!("step h must be positive, got {}", self.h)));
        }
        if self.h > t_end - t0 {
            return Err(ScenarioError::Invalid(format!("step h = {} exceeds the window", self.h)));
        }
        if let Some(tol) = self.tol_sim {
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(ScenarioError::Invalid(format!("tol_sim must be positive, got {tol}")));
            }
        }
        if self.initial.mode == IcMode::Relaxed
            && (self.initial.y0 != 0.0 || self.initial.dy0 != InitialDerivative::Value(0.0))
        {
            return Err(ScenarioError::Invalid("relaxed mode takes no initial values".into()));
        }
        if let (InitialDerivative::Auto, PartnerSpec::Constants(k)) = (self.initial.dy0, &self.partner) {
            if k.k1 == 0.0 {
                return Err(ScenarioError::Invalid("dy0 = auto needs k1 != 0".into()));
            }
        }
        let a = self.system_a()?;
        a.validate_window(self.window())?;
        self.system_b()?.validate_window(self.window())?;
        if let Some(r) = self.reference_system()? {
            r.validate_window(self.window())?;
        }
        Ok(())
    }

    /// Renders the scenario in the file format; `parse(render(s)) == s`.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| writeln!(out, "{k} = {v}").unwrap();
        kv("name", self.name.clone());
        if !self.description.is_empty() {
            kv("description", self.description.clone());
        }
        let mut s = out;
        if let Some(levels) = &self.switching {
            let text: Vec<String> =
                levels.iter().map(|l| format!("{}..{}:{}", num(l.start), num(l.end), num(l.value))).collect();
            write!(s, "\n[switching]\nlevels = {}\n", text.join(", ")).unwrap();
        }
        render_system(&mut s, "system_a", "a", &self.system_a);
        match &self.partner {
            PartnerSpec::Constants(k) => {
                write!(s, "\n[constants]\nk2 = {}\nk1 = {}\nk0 = {}\n", num(k.k2), num(k.k1), num(k.k0)).unwrap();
            }
            PartnerSpec::Explicit(spec) => render_system(&mut s, "system_b", "b", spec),
        }
        if let Some(r) = &self.reference_b {
            render_system(&mut s, "reference_b", "b", r);
            if let Some(note) = &self.reference_note {
                writeln!(s, "note = {note}").unwrap();
            }
        }
        let ic = &self.initial;
        let mode = match ic.mode {
            IcMode::Relaxed => "relaxed",
            IcMode::NonRelaxed => "nonrelaxed",
        };
        let dy0 = match ic.dy0 {
            InitialDerivative::Auto => "auto".to_string(),
            InitialDerivative::Value(v) => num(v),
        };
        write!(s, "\n[initial]\nmode = {mode}\nt0 = {}\ny0 = {}\ndy0 = {dy0}\n", num(ic.t0), num(ic.y0)).unwrap();
        match self.input {
            InputSignal::Zero => s.push_str("\n[input]\nkind = zero\n"),
            InputSignal::Sine { amplitude, frequency, phase } => write!(
                s,
                "\n[input]\nkind = sine\namplitude = {}\nfrequency = {}\nphase = {}\n",
                num(amplitude),
                num(frequency),
                num(phase)
            )
            .unwrap(),
        }
        write!(s, "\n[simulation]\nt_end = {}\nh = {}\n", num(self.t_end), num(self.h)).unwrap();
        if let Some(tol) = self.tol_sim {
            writeln!(s, "tol_sim = {}", num(tol)).unwrap();
        }
        let t = &self.tolerances;
        write!(
            s,
            "\n[tolerances]\ngamma = {}\ndelta = {}\nresidual = {}\ngrid = {}\n",
            num(t.gamma),
            num(t.delta),
            num(t.residual),
            t.grid
        )
        .unwrap();
        s
    }

    fn from_document(doc: &Document) -> Result<Self> {
        let top = doc.section("");
        let name = top.and_then(|s| s.get("name")).map(|e| e.value.clone()).unwrap_or_else(|| "scenario".into());
        let description = top.and_then(|s| s.get("description")).map(|e| e.value.clone()).unwrap_or_default();
        if let Some(s) = top {
            s.only(&["name", "description"])?;
        }

        let switching = match doc.section("switching") {
            Some(sec) => {
                sec.only(&["levels"])?;
                Some(parse_levels(sec.require("switching", "levels")?)?)
            }
            None => None,
        };

        let sec_a = doc.section("system_a").ok_or(ScenarioError::MissingSection("system_a"))?;
        sec_a.only(&["a2", "a1", "a0", "domain_start"])?;
        let system_a = SystemSpec {
            coefficients: vec![
                parse_coefficient(sec_a.require("system_a", "a0")?)?,
                parse_coefficient(sec_a.require("system_a", "a1")?)?,
                parse_coefficient(sec_a.require("system_a", "a2")?)?,
            ],
            domain_start: sec_a.get("domain_start").map(parse_number).transpose()?,
        };

        let partner = match (doc.section("constants"), doc.section("system_b")) {
            (Some(_), Some(sec)) => {
                return Err(sec.header_error("give either [constants] or [system_b], not both"));
            }
            (Some(sec), None) => {
                sec.only(&["k2", "k1", "k0"])?;
                let k = |key| sec.require("constants", key).and_then(parse_number);
                PartnerSpec::Constants(CommutativityConstants::new(k("k2")?, k("k1")?, k("k0")?))
            }
            (None, Some(sec)) => PartnerSpec::Explicit(parse_partner_system(sec, "system_b")?),
            (None, None) => return Err(ScenarioError::MissingSection("constants")),
        };

        let (reference_b, reference_note) = match doc.section("reference_b") {
            Some(sec) => (Some(parse_partner_system(sec, "reference_b")?), sec.get("note").map(|e| e.value.clone())),
            None => (None, None),
        };

        let sec = doc.section("initial").ok_or(ScenarioError::MissingSection("initial"))?;
        sec.only(&["mode", "t0", "y0", "dy0"])?;
        let mode_entry = sec.require("initial", "mode")?;
        let mode = match mode_entry.value.as_str() {
            "relaxed" => IcMode::Relaxed,
            "nonrelaxed" => IcMode::NonRelaxed,
            other => return Err(mode_entry.error(0, format!("unknown mode `{other}` (relaxed or nonrelaxed)"))),
        };
        let t0 = parse_number(sec.require("initial", "t0")?)?;
        let y0 = sec.get("y0").map(parse_number).transpose()?.unwrap_or(0.0);
        let dy0 = match sec.get("dy0") {
            Some(e) if e.value == "auto" => InitialDerivative::Auto,
            Some(e) => InitialDerivative::Value(parse_number(e)?),
            None => InitialDerivative::Value(0.0),
        };
        let initial = InitialSpec { mode, t0, y0, dy0 };

        let input = match doc.section("input") {
            None => InputSignal::Zero,
            Some(sec) => {
                sec.only(&["kind", "amplitude", "frequency", "phase"])?;
                let kind = sec.require("input", "kind")?;
                match kind.value.as_str() {
                    "zero" => InputSignal::Zero,
                    "sine" => InputSignal::Sine {
                        amplitude: parse_number(sec.require("input", "amplitude")?)?,
                        frequency: parse_number(sec.require("input", "frequency")?)?,
                        phase: sec.get("phase").map(parse_number).transpose()?.unwrap_or(0.0),
                    },
                    other => return Err(kind.error(0, format!("unknown input kind `{other}` (zero or sine)"))),
                }
            }
        };

        let sec = doc.section("simulation").ok_or(ScenarioError::MissingSection("simulation"))?;
        sec.only(&["t_end", "h", "tol_sim"])?;
        let t_end = parse_number(sec.require("simulation", "t_end")?)?;
        let h = parse_number(sec.require("simulation", "h")?)?;
        let tol_sim = sec.get("tol_sim").map(parse_number).transpose()?;

        let mut tolerances = Tolerances::default();
        if let Some(sec) = doc.section("tolerances") {
            sec.only(&["gamma", "delta", "residual", "grid"])?;
            if let Some(e) = sec.get("gamma") {
                tolerances.gamma = parse_number(e)?;
            }
            if let Some(e) = sec.get("delta") {
                tolerances.delta = parse_number(e)?;
            }
            if let Some(e) = sec.get("residual") {
                tolerances.residual = parse_number(e)?;
            }
            if let Some(e) = sec.get("grid") {
                tolerances.grid = e.value.parse().map_err(|_| e.error(0, "grid must be a positive integer".into()))?;
            }
        }

        Ok(Scenario {
            name,
            description,
            switching,
            system_a,
            partner,
            reference_b,
            reference_note,
            initial,
            input,
            t_end,
            h,
            tol_sim,
            tolerances,
        })
    }
}

fn render_system(s: &mut String, section: &str, prefix: &str, spec: &SystemSpec) {
    write!(s, "\n[{section}]\n").unwrap();
    for (i, c) in spec.coefficients.iter().enumerate().rev() {
        writeln!(s, "{prefix}{i} = {c}").unwrap();
    }
    if let Some(t) = spec.domain_start {
        writeln!(s, "domain_start = {}", num(t)).unwrap();
    }
}

/// Shortest round-tripping form of a number, `inf` for infinities.
fn num(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x:?}")
    }
}

fn parse_partner_system(sec: &Section, name: &'static str) -> Result<SystemSpec> {
    sec.only(&["b2", "b1", "b0", "domain_start", "note"])?;
    let order = if sec.get("b2").is_some() {
        2
    } else if sec.get("b1").is_some() {
        1
    } else {
        0
    };
    const KEYS: [&str; 3] = ["b0", "b1", "b2"];
    let coefficients = KEYS[..=order]
        .iter()
        .map(|k| parse_coefficient(sec.require(name, k)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(SystemSpec { coefficients, domain_start: sec.get("domain_start").map(parse_number).transpose()? })
}

fn parse_expression(entry: &Entry, text: &str, offset: usize) -> Result<Expression> {
    Expression::parse(text).map_err(|e| entry.error(offset + e.position, e.to_string()))
}

fn parse_number(entry: &Entry) -> Result<f64> {
    parse_number_at(entry, &entry.value, 0)
}

fn parse_number_at(entry: &Entry, text: &str, offset: usize) -> Result<f64> {
    let trimmed = text.trim();
    let lead = offset + (text.len() - text.trim_start().len());
    match trimmed {
        "inf" | "+inf" => return Ok(f64::INFINITY),
        "-inf" => return Ok(f64::NEG_INFINITY),
        _ => {}
    }
    let e = parse_expression(entry, trimmed, lead)?;
    if !e.is_time_independent() {
        return Err(entry.error(lead, format!("expected a constant, found `{trimmed}`")));
    }
    e.eval(0.0).map_err(|err| entry.error(lead, err.to_string()))
}

fn parse_coefficient(entry: &Entry) -> Result<CoefficientSpec> {
    let v = entry.value.as_str();
    if let Some(rest) = v.strip_prefix("piecewise") {
        let mut pieces = Vec::new();
        let mut offset = "piecewise".len();
        for part in rest.split(';') {
            let (range, expr) = part
                .split_once(':')
                .ok_or_else(|| entry.error(offset, "expected `start..end: expression`".into()))?;
            let (a, b) = parse_range(entry, range, offset)?;
            let expr_offset = offset + range.len() + 1;
            let lead = expr.len() - expr.trim_start().len();
            pieces.push((a, b, parse_expression(entry, expr.trim(), expr_offset + lead)?));
            offset += part.len() + 1;
        }
        return Ok(CoefficientSpec::Piecewise(pieces));
    }
    if v.starts_with("base:") {
        let mut base = None;
        let mut gain = None;
        let mut offset = 0;
        for word in v.split(' ') {
            if let Some(x) = word.strip_prefix("base:") {
                base = Some(parse_number_at(entry, x, offset + 5)?);
            } else if let Some(x) = word.strip_prefix("gain:") {
                gain = Some(parse_number_at(entry, x, offset + 5)?);
            } else if !word.is_empty() {
                return Err(entry.error(offset, format!("unexpected `{word}` in switched coefficient")));
            }
            offset += word.len() + 1;
        }
        return match (base, gain) {
            (Some(base), Some(gain)) => Ok(CoefficientSpec::Switched { base, gain }),
            _ => Err(entry.error(0, "switched coefficient needs `base:X gain:Y`".into())),
        };
    }
    Ok(CoefficientSpec::Expr(parse_expression(entry, v, 0)?))
}

fn parse_range(entry: &Entry, text: &str, offset: usize) -> Result<(f64, f64)> {
    let (a, b) = text.split_once("..").ok_or_else(|| entry.error(offset, "expected a range `start..end`".into()))?;
    Ok((parse_number_at(entry, a, offset)?, parse_number_at(entry, b, offset + a.len() + 2)?))
}

fn parse_levels(entry: &Entry) -> Result<Vec<Level>> {
    let mut levels = Vec::new();
    let mut offset = 0;
    for part in entry.value.split(',') {
        let (range, value) =
            part.rsplit_once(':').ok_or_else(|| entry.error(offset, "expected `start..end:value`".into()))?;
        let (start, end) = parse_range(entry, range, offset)?;
        let value = parse_number_at(entry, value, offset + range.len() + 1)?;
        levels.push(Level { start, end, value });
        offset += part.len() + 1;
    }
    Ok(levels)
}

#[derive(Debug)]
struct Entry {
    key: String,
    value: String,
    line: usize,
    /// 1-based column of the first character of `value`.
    column: usize,
}

impl Entry {
    fn error(&self, offset: usize, message: String) -> ScenarioError {
        ScenarioError::Syntax { line: self.line, column: self.column + offset, message }
    }
}

#[derive(Debug)]
struct Section {
    name: String,
    line: usize,
    entries: Vec<Entry>,
}

impl Section {
    fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.key == key)
    }

    fn require(&self, section: &'static str, key: &'static str) -> Result<&Entry> {
        self.get(key).ok_or(ScenarioError::Missing { section, key })
    }

    fn only(&self, allowed: &[&str]) -> Result<()> {
        match self.entries.iter().find(|e| !allowed.contains(&e.key.as_str())) {
            Some(e) => Err(ScenarioError::Syntax {
                line: e.line,
                column: 1,
                message: format!("unknown key `{}` in section [{}]", e.key, self.name),
            }),
            None => Ok(()),
        }
    }

    fn header_error(&self, message: &str) -> ScenarioError {
        ScenarioError::Syntax { line: self.line, column: 1, message: message.into() }
    }
}

#[derive(Debug)]
struct Document {
    sections: Vec<Section>,
}

const SECTIONS: [&str; 10] = [
    "",
    "switching",
    "system_a",
    "constants",
    "system_b",
    "reference_b",
    "initial",
    "input",
    "simulation",
    "tolerances",
];

impl Document {
    fn parse(text: &str) -> Result<Self> {
        let mut sections = vec![Section { name: String::new(), line: 0, entries: Vec::new() }];
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("");
            let trimmed = content.trim();
            if trimmed.is_empty() {
                continue;
            }
            let indent = content.len() - content.trim_start().len();
            if let Some(rest) = trimmed.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or(ScenarioError::Syntax {
                    line,
                    column: indent + 1,
                    message: "expected `]` after section name".into(),
                })?;
                let name = name.trim();
                if !SECTIONS[1..].contains(&name) {
                    return Err(ScenarioError::Syntax {
                        line,
                        column: indent + 2,
                        message: format!("unknown section [{name}]"),
                    });
                }
                if sections.iter().any(|s| s.name == name) {
                    return Err(ScenarioError::Syntax {
                        line,
                        column: indent + 2,
                        message: format!("section [{name}] appears twice"),
                    });
                }
                sections.push(Section { name: name.into(), line, entries: Vec::new() });
                continue;
            }
            let eq = content.find('=').ok_or(ScenarioError::Syntax {
                line,
                column: indent + 1,
                message: "expected `key = value`".into(),
            })?;
            let key = content[..eq].trim();
            if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(ScenarioError::Syntax { line, column: indent + 1, message: format!("invalid key `{key}`") });
            }
            let after = &content[eq + 1..];
            let value = after.trim();
            let column = eq + 2 + (after.len() - after.trim_start().len());
            let section = sections.last_mut().expect("top-level section");
            if section.get(key).is_some() {
                return Err(ScenarioError::Syntax { line, column: indent + 1, message: format!("duplicate key `{key}`") });
            }
            section.entries.push(Entry { key: key.into(), value: value.into(), line, column });
        }
        Ok(Document { sections })
    }

    fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = "\
name = demo
[switching]
levels = 0..1:0, 1..inf:3   # step
[system_a]
a2 = 1
a1 = base:-1 gain:3
a0 = piecewise 0..1: t; 1..inf: 2*t
[constants]
k2 = 1
k1 = sqrt(4)
k0 = 3
[initial]
mode = nonrelaxed
t0 = 0
y0 = 1
dy0 = auto
[input]
kind = sine
amplitude = 15
frequency = 0.5
[simulation]
t_end = 4
h = 1e-3
";

    #[test]
    fn parses_all_forms() {
        let s = Scenario::parse(EXAMPLE).unwrap();
        assert_eq!(s.name, "demo");
        assert_eq!(s.switching.as_ref().unwrap().len(), 2);
        assert_eq!(s.system_a.coefficients[1], CoefficientSpec::Switched { base: -1.0, gain: 3.0 });
        assert!(matches!(&s.system_a.coefficients[0], CoefficientSpec::Piecewise(p) if p.len() == 2));
        assert_eq!(s.partner, PartnerSpec::Constants(CommutativityConstants::new(1.0, 2.0, 3.0)));
        assert_eq!(s.initial.dy0, InitialDerivative::Auto);
        assert_eq!(s.input, InputSignal::Sine { amplitude: 15.0, frequency: 0.5, phase: 0.0 });
        assert_eq!(s.tolerances, Tolerances::default());
        s.validate().unwrap();
        let a = s.system_a().unwrap();
        assert_eq!(a.breakpoints((0.0, 4.0)), vec![1.0]);
    }

    #[test]
    fn render_round_trips() {
        let s = Scenario::parse(EXAMPLE).unwrap();
        let again = Scenario::parse(&s.render()).unwrap();
        assert_eq!(s, again);
    }

    #[test]
    fn errors_point_at_the_problem() {
        let text = EXAMPLE.replace("k0 = 3", "k0 = 3,5");
        match Scenario::parse(&text) {
            Err(ScenarioError::Syntax { line, column, .. }) => assert_eq!((line, column), (11, 7)),
            other => panic!("{other:?}"),
        }
        let text = EXAMPLE.replace("a2 = 1", "a2 = 1 + foo");
        match Scenario::parse(&text) {
            Err(ScenarioError::Syntax { line, column, message }) => {
                assert_eq!((line, column), (5, 10));
                assert!(message.contains("foo"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        let text = EXAMPLE.replace("[input]", "[inputs]");
        assert!(matches!(Scenario::parse(&text), Err(ScenarioError::Syntax { line: 17, .. })));
        let text = EXAMPLE.replace("h = 1e-3", "step = 1e-3");
        assert!(matches!(Scenario::parse(&text), Err(ScenarioError::Syntax { line: 23, .. })));
        let text = EXAMPLE.replace("t0 = 0\n", "");
        assert!(matches!(Scenario::parse(&text), Err(ScenarioError::Missing { section: "initial", key: "t0" })));
        let text = EXAMPLE.replace("k1 = sqrt(4)", "k1 = t");
        assert!(matches!(Scenario::parse(&text), Err(ScenarioError::Syntax { line: 10, .. })));
    }

    #[test]
    fn explicit_partner() {
        let text = EXAMPLE.replace("[constants]\nk2 = 1\nk1 = sqrt(4)\nk0 = 3", "[system_b]\nb1 = 1\nb0 = base:1 gain:2");
        let s = Scenario::parse(&text).unwrap();
        let b = s.system_b().unwrap();
        assert_eq!(b.order(), 1);
        assert_eq!(Scenario::parse(&s.render()).unwrap(), s);
    }

    #[test]
    fn validation_rejects_bad_windows() {
        let mut s = Scenario::parse(EXAMPLE).unwrap();
        s.t_end = -1.0;
        assert!(s.validate().is_err());
        let mut s = Scenario::parse(EXAMPLE).unwrap();
        s.initial.mode = IcMode::Relaxed;
        assert!(s.validate().is_err());
        let text = EXAMPLE.replace("a2 = 1", "a2 = t - 2");
        assert!(Scenario::parse(&text).unwrap().validate().is_err());
    }
}
