//! Scenario files: the line-oriented `[section]` / `key = value` format
//! that feeds the CLI.
//!
//! Values are stored exactly as given (dB quantities stay in dB) so that
//! `serialize` → `parse` is lossless; conversion to linear happens once,
//! inside `model()` / `budget()`. Unknown keys and sections are hard
//! errors with line numbers — a typo must never silently fall back to a
//! default. `#` starts a comment anywhere on a line, so values (including
//! output paths) cannot contain `#`.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::channel::{LinkBudget, PropagationModel};
use crate::error::{Error, Result};
use crate::relay::RelayField;

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationSection {
    pub kappa0_db: f64,
    pub kappa_half_pi_db: f64,
    pub alpha0: f64,
    pub alpha_half_pi: f64,
    pub a2: f64,
    pub b2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BudgetSection {
    pub gamma_u_db: f64,
    pub gamma_r_db: f64,
    pub xi_db: f64,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelaySection {
    pub lambda: f64,
    pub disk_radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepScale {
    Linear,
    Log,
}

impl fmt::Display for SweepScale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepScale::Linear => "linear",
            SweepScale::Log => "log",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    H,
    RD,
    Rho,
    Theta,
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepVariable::H => "h",
            SweepVariable::RD => "r_d",
            SweepVariable::Rho => "rho",
            SweepVariable::Theta => "theta",
        })
    }
}

impl FromStr for SweepVariable {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "h" => Ok(SweepVariable::H),
            "r_d" => Ok(SweepVariable::RD),
            "rho" => Ok(SweepVariable::Rho),
            "theta" => Ok(SweepVariable::Theta),
            other => Err(format!("unknown sweep variable `{other}` (h, r_d, rho, theta)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSection {
    pub variable: SweepVariable,
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub scale: SweepScale,
    /// Fixed ground distance for commands that sweep something else.
    pub r_d: f64,
}

impl SweepSection {
    /// The sweep axis, endpoints exact.
    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        (0..n)
            .map(|i| {
                if i == 0 {
                    self.min
                } else if i == n - 1 {
                    self.max
                } else {
                    let t = i as f64 / (n - 1) as f64;
                    match self.scale {
                        SweepScale::Linear => self.min + (self.max - self.min) * t,
                        SweepScale::Log => (self.min.ln() + (self.max.ln() - self.min.ln()) * t).exp(),
                    }
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McSection {
    pub trials: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSection {
    pub path: String,
}

/// Optional (r_d × h) grid for the validation harness.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidateSection {
    pub r_d: Vec<f64>,
    pub h: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub propagation: PropagationSection,
    pub budget: BudgetSection,
    pub relays: RelaySection,
    pub sweep: SweepSection,
    pub mc: McSection,
    pub output: OutputSection,
    pub validate: Option<ValidateSection>,
}

impl Scenario {
    pub fn parse_file(path: &Path) -> Result<Scenario> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_str(&text, &path.display().to_string())
    }

    pub fn parse_str(text: &str, path: &str) -> Result<Scenario> {
        Parser::new(text, path)?.finish()
    }

    /// Linear-domain channel model (single dB→linear conversion point).
    pub fn model(&self) -> Result<PropagationModel> {
        PropagationModel::new_db(
            self.propagation.kappa0_db,
            self.propagation.kappa_half_pi_db,
            self.propagation.alpha0,
            self.propagation.alpha_half_pi,
            self.propagation.a2,
            self.propagation.b2,
        )
    }

    pub fn link_budget(&self) -> Result<LinkBudget> {
        LinkBudget::from_db(
            self.budget.gamma_u_db,
            self.budget.gamma_r_db,
            self.budget.xi_db,
            self.budget.epsilon,
        )
    }

    pub fn relay_field(&self) -> Result<RelayField> {
        RelayField::new(self.relays.lambda, self.relays.disk_radius)
    }

    /// Lossless canonical text form; reparsing yields an identical Scenario.
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        let p = &self.propagation;
        s.push_str("[propagation]\n");
        s.push_str(&format!("kappa0_db = {}\n", p.kappa0_db));
        s.push_str(&format!("kappa_half_pi_db = {}\n", p.kappa_half_pi_db));
        s.push_str(&format!("alpha0 = {}\n", p.alpha0));
        s.push_str(&format!("alpha_half_pi = {}\n", p.alpha_half_pi));
        s.push_str(&format!("a2 = {}\n", p.a2));
        s.push_str(&format!("b2 = {}\n", p.b2));
        let b = &self.budget;
        s.push_str("\n[budget]\n");
        s.push_str(&format!("gamma_u_db = {}\n", b.gamma_u_db));
        s.push_str(&format!("gamma_r_db = {}\n", b.gamma_r_db));
        s.push_str(&format!("xi_db = {}\n", b.xi_db));
        s.push_str(&format!("epsilon = {}\n", b.epsilon));
        let r = &self.relays;
        s.push_str("\n[relays]\n");
        s.push_str(&format!("lambda = {}\n", r.lambda));
        s.push_str(&format!("disk_radius = {}\n", r.disk_radius));
        let w = &self.sweep;
        s.push_str("\n[sweep]\n");
        s.push_str(&format!("variable = {}\n", w.variable));
        s.push_str(&format!("min = {}\n", w.min));
        s.push_str(&format!("max = {}\n", w.max));
        s.push_str(&format!("points = {}\n", w.points));
        s.push_str(&format!("scale = {}\n", w.scale));
        s.push_str(&format!("r_d = {}\n", w.r_d));
        s.push_str("\n[mc]\n");
        s.push_str(&format!("trials = {}\n", self.mc.trials));
        s.push_str(&format!("seed = {}\n", self.mc.seed));
        s.push_str("\n[output]\n");
        s.push_str(&format!("path = {}\n", self.output.path));
        if let Some(v) = &self.validate {
            let join = |xs: &[f64]| {
                xs.iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join(", ")
            };
            s.push_str("\n[validate]\n");
            s.push_str(&format!("r_d = {}\n", join(&v.r_d)));
            s.push_str(&format!("h = {}\n", join(&v.h)));
        }
        s
    }
}

const SECTIONS: &[&str] = &[
    "propagation",
    "budget",
    "relays",
    "sweep",
    "mc",
    "output",
    "validate",
];

/// Raw key/value content of one section, line numbers retained.
struct SectionData<'a> {
    header_line: usize,
    entries: HashMap<&'a str, (usize, &'a str)>,
}

struct Parser<'a> {
    path: &'a str,
    sections: HashMap<&'a str, SectionData<'a>>,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str, path: &'a str) -> Result<Self> {
        let mut sections: HashMap<&str, SectionData> = HashMap::new();
        let mut current: Option<&str> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                let name = name.trim();
                if !SECTIONS.contains(&name) {
                    return Err(Error::Parse {
                        path: path.into(),
                        line: line_no,
                        msg: format!("unknown section [{name}]"),
                    });
                }
                if sections.contains_key(name) {
                    return Err(Error::Parse {
                        path: path.into(),
                        line: line_no,
                        msg: format!("section [{name}] appears twice"),
                    });
                }
                sections.insert(
                    name,
                    SectionData {
                        header_line: line_no,
                        entries: HashMap::new(),
                    },
                );
                current = Some(name);
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Parse {
                    path: path.into(),
                    line: line_no,
                    msg: format!("expected `key = value` or `[section]`, got `{line}`"),
                });
            };
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() || value.is_empty() {
                return Err(Error::Parse {
                    path: path.into(),
                    line: line_no,
                    msg: "empty key or value".into(),
                });
            }
            let Some(section) = current else {
                return Err(Error::Parse {
                    path: path.into(),
                    line: line_no,
                    msg: format!("`{key}` appears before any [section] header"),
                });
            };
            let data = sections.get_mut(section).expect("current section exists");
            if data.entries.insert(key, (line_no, value)).is_some() {
                return Err(Error::Parse {
                    path: path.into(),
                    line: line_no,
                    msg: format!("duplicate key `{key}` in [{section}]"),
                });
            }
        }
        Ok(Self { path, sections })
    }

    fn section(&mut self, name: &str) -> Result<Keys<'a>> {
        let data = self
            .sections
            .remove(name)
            .ok_or_else(|| Error::MissingSection(name.to_string()))?;
        Ok(Keys {
            path: self.path.to_string(),
            section: name.to_string(),
            header_line: data.header_line,
            entries: data.entries,
        })
    }

    fn finish(mut self) -> Result<Scenario> {
        let mut s = self.section("propagation")?;
        let propagation = PropagationSection {
            kappa0_db: s.f64("kappa0_db")?,
            kappa_half_pi_db: s.f64("kappa_half_pi_db")?,
            alpha0: s.f64("alpha0")?,
            alpha_half_pi: s.f64("alpha_half_pi")?,
            a2: s.f64("a2")?,
            b2: s.f64("b2")?,
        };
        s.done()?;
        range(
            "kappa_half_pi_db",
            propagation.kappa_half_pi_db >= propagation.kappa0_db,
            "must be ≥ kappa0_db",
        )?;
        range("alpha_half_pi", propagation.alpha_half_pi >= 2.0, "must be ≥ 2")?;
        range(
            "alpha0",
            propagation.alpha0 >= propagation.alpha_half_pi,
            "must be ≥ alpha_half_pi",
        )?;
        range("a2", propagation.a2 > 0.0, "must be > 0")?;
        range("b2", propagation.b2 > 0.0, "must be > 0")?;

        let mut s = self.section("budget")?;
        let budget = BudgetSection {
            gamma_u_db: s.f64("gamma_u_db")?,
            gamma_r_db: s.f64("gamma_r_db")?,
            xi_db: s.f64("xi_db")?,
            epsilon: s.f64("epsilon")?,
        };
        s.done()?;
        range(
            "epsilon",
            budget.epsilon > 0.0 && budget.epsilon < 1.0,
            "must lie in (0, 1)",
        )?;

        let mut s = self.section("relays")?;
        let relays = RelaySection {
            lambda: s.f64("lambda")?,
            disk_radius: s.f64("disk_radius")?,
        };
        s.done()?;
        range("lambda", relays.lambda >= 0.0, "must be ≥ 0")?;
        range("disk_radius", relays.disk_radius > 0.0, "must be > 0")?;

        let mut s = self.section("sweep")?;
        let variable_raw = s.string("variable")?;
        let variable = SweepVariable::from_str(&variable_raw)
            .map_err(|msg| Error::Range { key: "variable".into(), msg })?;
        let sweep = SweepSection {
            variable,
            min: s.f64("min")?,
            max: s.f64("max")?,
            points: s.u64("points")? as usize,
            scale: match s.string("scale")?.as_str() {
                "linear" => SweepScale::Linear,
                "log" => SweepScale::Log,
                other => {
                    return Err(Error::Range {
                        key: "scale".into(),
                        msg: format!("unknown scale `{other}` (linear, log)"),
                    })
                }
            },
            r_d: s.f64("r_d")?,
        };
        s.done()?;
        range("points", sweep.points >= 2, "need at least 2 sweep points")?;
        range("min", sweep.min < sweep.max, "must be < max")?;
        if sweep.scale == SweepScale::Log {
            range("min", sweep.min > 0.0, "log sweeps need min > 0")?;
        }
        range("r_d", sweep.r_d > 0.0, "must be > 0")?;

        let mut s = self.section("mc")?;
        let mc = McSection {
            trials: s.u64("trials")?,
            seed: s.u64("seed")?,
        };
        s.done()?;
        range("trials", mc.trials >= 1, "need at least one trial")?;

        let mut s = self.section("output")?;
        let output = OutputSection {
            path: s.string("path")?,
        };
        s.done()?;

        let validate = if self.sections.contains_key("validate") {
            let mut s = self.section("validate")?;
            let v = ValidateSection {
                r_d: s.f64_list("r_d")?,
                h: s.f64_list("h")?,
            };
            s.done()?;
            range("r_d", !v.r_d.is_empty(), "need at least one value")?;
            range("h", !v.h.is_empty(), "need at least one value")?;
            range("r_d", v.r_d.iter().all(|&x| x >= 0.0), "all values must be ≥ 0")?;
            range("h", v.h.iter().all(|&x| x >= 0.0), "all values must be ≥ 0")?;
            Some(v)
        } else {
            None
        };

        Ok(Scenario {
            propagation,
            budget,
            relays,
            sweep,
            mc,
            output,
            validate,
        })
    }
}

fn range(key: &str, ok: bool, msg: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Range {
            key: key.into(),
            msg: msg.into(),
        })
    }
}

struct Keys<'a> {
    path: String,
    section: String,
    header_line: usize,
    entries: HashMap<&'a str, (usize, &'a str)>,
}

impl<'a> Keys<'a> {
    fn raw(&mut self, key: &str) -> Result<(usize, &'a str)> {
        self.entries.remove(key).ok_or_else(|| Error::Parse {
            path: self.path.clone(),
            line: self.header_line,
            msg: format!("missing key `{key}` in [{}]", self.section),
        })
    }

    fn parse_err(&self, line: usize, msg: String) -> Error {
        Error::Parse {
            path: self.path.clone(),
            line,
            msg,
        }
    }

    fn f64(&mut self, key: &str) -> Result<f64> {
        let (line, v) = self.raw(key)?;
        let x: f64 = v
            .parse()
            .map_err(|_| self.parse_err(line, format!("`{key}`: `{v}` is not a number")))?;
        if !x.is_finite() {
            return Err(self.parse_err(line, format!("`{key}` must be finite")));
        }
        Ok(x)
    }

    fn u64(&mut self, key: &str) -> Result<u64> {
        let (line, v) = self.raw(key)?;
        v.parse()
            .map_err(|_| self.parse_err(line, format!("`{key}`: `{v}` is not a nonnegative integer")))
    }

    fn string(&mut self, key: &str) -> Result<String> {
        Ok(self.raw(key)?.1.to_string())
    }

    fn f64_list(&mut self, key: &str) -> Result<Vec<f64>> {
        let (line, v) = self.raw(key)?;
        v.split(',')
            .map(|part| {
                let part = part.trim();
                let x: f64 = part.parse().map_err(|_| {
                    self.parse_err(line, format!("`{key}`: `{part}` is not a number"))
                })?;
                if !x.is_finite() {
                    return Err(self.parse_err(line, format!("`{key}` entries must be finite")));
                }
                Ok(x)
            })
            .collect()
    }

    fn done(self) -> Result<()> {
        if let Some((key, (line, _))) = self.entries.into_iter().next() {
            return Err(Error::Parse {
                path: self.path,
                line,
                msg: format!("unknown key `{key}` in [{}]", self.section),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const BASE: &str = "\
# demo scenario
[propagation]
kappa0_db = 5
kappa_half_pi_db = 15
alpha0 = 3.5
alpha_half_pi = 2
a2 = 60
b2 = 16

[budget]
gamma_u_db = 75
gamma_r_db = 75
xi_db = 0
epsilon = 0.12

[relays]
lambda = 0.0003
disk_radius = 1500

[sweep]
variable = h
min = 200
max = 3000
points = 57
scale = log
r_d = 1000

[mc]
trials = 100000
seed = 73

[output]
path = out.csv
";

    #[test]
    fn parses_and_builds_linear_types() {
        let sc = Scenario::parse_str(BASE, "test").unwrap();
        assert_eq!(sc.propagation.kappa0_db, 5.0);
        assert_eq!(sc.budget.epsilon, 0.12);
        assert_eq!(sc.mc.trials, 100_000);
        assert!(sc.validate.is_none());
        let budget = sc.link_budget().unwrap();
        assert_relative_eq!(budget.gamma_u, 10f64.powf(7.5));
        assert_relative_eq!(budget.xi, 1.0);
        let model = sc.model().unwrap();
        assert_relative_eq!(model.kappa0, 10f64.powf(0.5));
        let field = sc.relay_field().unwrap();
        assert_eq!(field.disk_radius, 1500.0);
    }

    #[test]
    fn serialization_round_trips_exactly() {
        let mut sc = Scenario::parse_str(BASE, "test").unwrap();
        sc.validate = Some(ValidateSection {
            r_d: vec![450.0, 600.0, 750.0, 900.0],
            h: vec![500.0, 700.0, 1000.0, 1400.0],
        });
        // Awkward values exercise the shortest-representation guarantee.
        sc.relays.lambda = 0.1 + 0.2;
        sc.budget.gamma_u_db = 75.000000000000014;
        let text = sc.serialize();
        let back = Scenario::parse_str(&text, "roundtrip").unwrap();
        assert_eq!(sc, back);
        assert_eq!(text, back.serialize());
    }

    #[test]
    fn db_shift_scales_linearly() {
        let shifted = BASE.replace("gamma_u_db = 75", "gamma_u_db = 85");
        let a = Scenario::parse_str(BASE, "a").unwrap().link_budget().unwrap();
        let b = Scenario::parse_str(&shifted, "b").unwrap().link_budget().unwrap();
        assert_relative_eq!(b.gamma_u / a.gamma_u, 10.0, max_relative = 1e-14);
        assert_eq!(b.gamma_r, a.gamma_r);
    }

    #[test]
    fn unknown_key_is_a_hard_error_with_line() {
        let bad = BASE.replace("lambda = 0.0003", "lambda = 0.0003\nlambda_typo = 1");
        let err = Scenario::parse_str(&bad, "t").unwrap_err();
        match err {
            Error::Parse { line, ref msg, .. } => {
                assert_eq!(line, 18);
                assert!(msg.contains("lambda_typo"), "{msg}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn out_of_range_epsilon_names_the_key() {
        let bad = BASE.replace("epsilon = 0.12", "epsilon = 1.5");
        match Scenario::parse_str(&bad, "t").unwrap_err() {
            Error::Range { key, .. } => assert_eq!(key, "epsilon"),
            other => panic!("expected range error, got {other:?}"),
        }
    }

    #[test]
    fn missing_section_is_reported() {
        let bad = BASE.replace("[mc]\ntrials = 100000\nseed = 73\n", "");
        match Scenario::parse_str(&bad, "t").unwrap_err() {
            Error::MissingSection(name) => assert_eq!(name, "mc"),
            other => panic!("expected missing-section error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_lines_carry_line_numbers() {
        let bad = BASE.replace("a2 = 60", "a2 60");
        match Scenario::parse_str(&bad, "t").unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 7),
            other => panic!("{other:?}"),
        }
        let bad = BASE.replace("[relays]", "[relayz]");
        assert!(matches!(
            Scenario::parse_str(&bad, "t").unwrap_err(),
            Error::Parse { line: 16, .. }
        ));
        let bad = BASE.replace("points = 57", "points = fifty");
        assert!(matches!(
            Scenario::parse_str(&bad, "t").unwrap_err(),
            Error::Parse { .. }
        ));
        let bad = BASE.replace("seed = 73", "seed = 73\nseed = 74");
        assert!(matches!(
            Scenario::parse_str(&bad, "t").unwrap_err(),
            Error::Parse { .. }
        ));
    }

    #[test]
    fn validate_lists_parse() {
        let text = format!("{BASE}\n[validate]\nr_d = 450, 600\nh = 500, 700, 1000\n");
        let sc = Scenario::parse_str(&text, "t").unwrap();
        let v = sc.validate.unwrap();
        assert_eq!(v.r_d, vec![450.0, 600.0]);
        assert_eq!(v.h, vec![500.0, 700.0, 1000.0]);
    }

    #[test]
    fn sweep_axis_generation() {
        let sc = Scenario::parse_str(BASE, "t").unwrap();
        let vals = sc.sweep.values();
        assert_eq!(vals.len(), 57);
        assert_eq!(vals[0], 200.0);
        assert_eq!(vals[56], 3000.0);
        // Log spacing: constant ratio between neighbors.
        let r0 = vals[1] / vals[0];
        let r1 = vals[30] / vals[29];
        assert_relative_eq!(r0, r1, max_relative = 1e-9);

        let linear = SweepSection {
            variable: SweepVariable::RD,
            min: 0.0,
            max: 10.0,
            points: 5,
            scale: SweepScale::Linear,
            r_d: 1000.0,
        };
        assert_eq!(linear.values(), vec![0.0, 2.5, 5.0, 7.5, 10.0]);
    }

    #[test]
    fn comments_and_whitespace_are_tolerated() {
        let text = BASE.replace("a2 = 60", "  a2 = 60   # sharp urban transition");
        let sc = Scenario::parse_str(&text, "t").unwrap();
        assert_eq!(sc.propagation.a2, 60.0);
    }
}
