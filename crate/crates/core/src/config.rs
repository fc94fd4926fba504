//! Sectioned `key = value` problem files.
//!
//! ```text
//! [geometry]
//! n = 3
//! r0 = 1
//!
//! [equation.1]
//! h.power = 4                 # or: h = <expression in r> with mu = <decay>
//! c = 2
//! d_tilde = -4                # or: d = <value>, never both
//! alpha.atoms = (1 @ 1/4)
//! alpha.density = (2 on 0 .. 1/2)
//! beta.atoms = (1 @ 1/2)
//! window = 1/4, 1/2
//! f = (2 - sin(z1^2 + z2^2)) * u^5
//! f.base = u^5                # factored envelope: f.q_lo, f.q_hi, optional f.ratio_inf, f.ratio_sup
//! f.q_lo = 1                  # sampled envelope instead: f.gradient_cap = Z
//! f.q_hi = 3
//!
//! [boxes]
//! rho = 1/3, 1/2
//! s = 2, 3
//! theta = 10, 10
//! ```
//!
//! Numbers may be constant expressions such as `1/4` or `2*pi`. Lines starting
//! with `#` or `;` are comments; a `#` after a value starts a trailing comment.

use std::collections::BTreeMap;
use std::path::Path;

use crate::certify::BoxPair;
use crate::constants::ConeWindow;
use crate::error::{Error, Result, Violation};
use crate::expr::Expr;
use crate::kernel::RobinBC;
use crate::nonlinearity::{Nonlinearity, NonlinearityEnvelope};
use crate::nonlocal::{Atom, DensityPiece, NonlocalFunctional};
use crate::problem::{EquationSpec, ProblemSpec};
use crate::radial::{ExteriorGeometry, RadialWeight};

/// The example system shipped with the library.
pub const EXAMPLE_SPEC: &str = include_str!("../specs/example.ini");

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
}

#[derive(Debug, Default)]
struct Section {
    line: usize,
    entries: BTreeMap<String, Entry>,
}

impl Section {
    fn take(&mut self, key: &str) -> Option<Entry> {
        self.entries.remove(key)
    }

    fn need(&mut self, key: &str, name: &str) -> Result<Entry> {
        self.take(key).ok_or_else(|| Error::Syntax {
            line: self.line,
            message: format!("[{name}] is missing `{key}`"),
        })
    }

    fn finish(self, name: &str) -> Result<()> {
        match self.entries.into_iter().min_by_key(|(_, e)| e.line) {
            Some((k, e)) => Err(Error::Syntax {
                line: e.line,
                message: format!("unknown key `{k}` in [{name}]"),
            }),
            None => Ok(()),
        }
    }
}

const SECTIONS: [&str; 4] = ["geometry", "equation.1", "equation.2", "boxes"];

fn split_sections(src: &str) -> Result<BTreeMap<String, Section>> {
    let mut out: BTreeMap<String, Section> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (k, raw) in src.lines().enumerate() {
        let line = k + 1;
        let text = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if text.is_empty() || text.starts_with(';') {
            continue;
        }
        if let Some(rest) = text.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| Error::Syntax {
                line,
                message: format!("unterminated section header `{text}`"),
            })?;
            let name = name.trim().to_string();
            if !SECTIONS.contains(&name.as_str()) {
                return Err(Error::Syntax {
                    line,
                    message: format!("unknown section [{name}]"),
                });
            }
            if out.contains_key(&name) {
                return Err(Error::Syntax {
                    line,
                    message: format!("duplicate section [{name}]"),
                });
            }
            out.insert(
                name.clone(),
                Section {
                    line,
                    entries: BTreeMap::new(),
                },
            );
            current = Some(name);
            continue;
        }
        let Some((key, value)) = text.split_once('=') else {
            return Err(Error::Syntax {
                line,
                message: format!("expected `key = value`, found `{text}`"),
            });
        };
        let Some(sec) = current.as_ref() else {
            return Err(Error::Syntax {
                line,
                message: "key outside of any section".into(),
            });
        };
        let (key, value) = (key.trim().to_string(), value.trim().to_string());
        if key.is_empty() || value.is_empty() {
            return Err(Error::Syntax {
                line,
                message: format!("empty key or value in `{text}`"),
            });
        }
        let section = out.get_mut(sec).expect("section exists");
        if section.entries.contains_key(&key) {
            return Err(Error::Syntax {
                line,
                message: format!("duplicate key `{key}`"),
            });
        }
        section.entries.insert(key, Entry { value, line });
    }
    if out.is_empty() {
        return Err(Error::Syntax {
            line: 1,
            message: "spec file has no sections".into(),
        });
    }
    Ok(out)
}

fn number(e: &Entry) -> Result<f64> {
    number_at(&e.value, e.line)
}

fn number_at(s: &str, line: usize) -> Result<f64> {
    let x = Expr::constant(s.trim()).map_err(|err| Error::Syntax {
        line,
        message: format!("bad number `{}`: {err}", s.trim()),
    })?;
    if !x.is_finite() {
        return Err(Error::Syntax {
            line,
            message: format!("`{}` is not a finite number", s.trim()),
        });
    }
    Ok(x)
}

/// Splits at top-level commas.
fn split_top(s: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let (mut depth, mut start) = (0i32, 0);
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts
}

fn pair(e: &Entry) -> Result<[f64; 2]> {
    let parts = split_top(&e.value);
    if parts.len() != 2 {
        return Err(Error::Syntax {
            line: e.line,
            message: format!("expected two comma-separated numbers, found `{}`", e.value),
        });
    }
    Ok([number_at(parts[0], e.line)?, number_at(parts[1], e.line)?])
}

/// `(a), (b), ...` → inner texts.
fn groups(e: &Entry) -> Result<Vec<String>> {
    split_top(&e.value)
        .into_iter()
        .map(|g| {
            let g = g.trim();
            g.strip_prefix('(')
                .and_then(|x| x.strip_suffix(')'))
                .map(str::to_string)
                .ok_or_else(|| Error::Syntax {
                    line: e.line,
                    message: format!("expected a parenthesized group, found `{g}`"),
                })
        })
        .collect()
}

fn atoms(e: &Entry) -> Result<Vec<Atom>> {
    groups(e)?
        .iter()
        .map(|g| {
            let (w, t) = g.split_once('@').ok_or_else(|| Error::Syntax {
                line: e.line,
                message: format!("atom `({g})` needs the form (weight @ node)"),
            })?;
            Ok(Atom {
                weight: number_at(w, e.line)?,
                node: number_at(t, e.line)?,
            })
        })
        .collect()
}

fn density(e: &Entry) -> Result<Vec<DensityPiece>> {
    groups(e)?
        .iter()
        .map(|g| {
            let bad = || Error::Syntax {
                line: e.line,
                message: format!("density `({g})` needs the form (weight on lo .. hi)"),
            };
            let (w, range) = g.split_once(" on ").ok_or_else(bad)?;
            let (lo, hi) = range.split_once("..").ok_or_else(bad)?;
            Ok(DensityPiece {
                weight: number_at(w, e.line)?,
                lo: number_at(lo, e.line)?,
                hi: number_at(hi, e.line)?,
            })
        })
        .collect()
}

fn functional(sec: &mut Section, prefix: &str, name: &str) -> Result<NonlocalFunctional> {
    let a = match sec.take(&format!("{prefix}.atoms")) {
        Some(e) => atoms(&e)?,
        None => Vec::new(),
    };
    let (d, line) = match sec.take(&format!("{prefix}.density")) {
        Some(e) => (density(&e)?, e.line),
        None => (Vec::new(), sec.line),
    };
    NonlocalFunctional::new(a, d).map_err(|err| Error::Syntax {
        line,
        message: format!("[{name}] {prefix}: {err}"),
    })
}

fn expression(e: &Entry, vars: &[&str]) -> Result<Expr> {
    Expr::parse(&e.value, vars).map_err(|err| Error::Syntax {
        line: e.line,
        message: format!("bad expression `{}`: {err}", e.value),
    })
}

fn invalid(line: usize, equation: Option<usize>, assumption: &str, err: Error) -> Error {
    match err {
        Error::Validation(v) => Error::Validation(
            v.into_iter()
                .map(|mut x| {
                    if x.equation.is_none() {
                        x.equation = equation;
                    }
                    x
                })
                .collect(),
        ),
        other => Error::Validation(vec![Violation::new(
            equation,
            assumption,
            format!("line {line}: {other}"),
        )]),
    }
}

fn equation(mut sec: Section, i: usize, geom: &ExteriorGeometry) -> Result<EquationSpec> {
    let name = format!("equation.{i}");
    let idx = Some(i);

    let weight = match (sec.take("h.power"), sec.take("h")) {
        (Some(p), None) => {
            RadialWeight::power(number(&p)?, geom).map_err(|e| invalid(p.line, idx, "μ>0", e))?
        }
        (None, Some(h)) => {
            let mu = sec.need("mu", &name)?;
            RadialWeight::expression(expression(&h, &["r"])?, number(&mu)?)
        }
        (Some(p), Some(_)) => {
            return Err(Error::Syntax {
                line: p.line,
                message: format!("[{name}] gives both `h` and `h.power`"),
            })
        }
        (None, None) => {
            return Err(Error::Syntax {
                line: sec.line,
                message: format!("[{name}] needs `h` or `h.power`"),
            })
        }
    };

    let c_entry = sec.need("c", &name)?;
    let c = number(&c_entry)?;
    let bc = match (sec.take("d_tilde"), sec.take("d")) {
        (Some(dt), None) => RobinBC::from_pde(c, number(&dt)?, geom).map_err(|e| invalid(dt.line, idx, "d̃≤0", e))?,
        (None, Some(d)) => RobinBC::new(c, number(&d)?).map_err(|e| invalid(d.line, idx, "c,d≥0, c+d>0", e))?,
        (Some(dt), Some(_)) => {
            return Err(Error::Syntax {
                line: dt.line,
                message: format!("[{name}] gives both `d_tilde` and `d`; use one"),
            })
        }
        (None, None) => {
            return Err(Error::Syntax {
                line: c_entry.line,
                message: format!("[{name}] needs `d_tilde` or `d`"),
            })
        }
    };

    let alpha = functional(&mut sec, "alpha", &name)?;
    let beta = functional(&mut sec, "beta", &name)?;

    let w = sec.need("window", &name)?;
    let [a, b] = pair(&w)?;
    let window = ConeWindow::new(a, b).map_err(|e| invalid(w.line, idx, "0<a<b<1, a+b<1", e))?;

    let f_entry = sec.need("f", &name)?;
    let f = Nonlinearity::from_expr(expression(&f_entry, &Nonlinearity::VARS)?);
    let envelope = match (sec.take("f.base"), sec.take("f.gradient_cap")) {
        (Some(base), None) => {
            let base_expr = expression(&base, &["u", "v"])?;
            let base = Nonlinearity::custom(base_expr.source().to_string(), move |u, v, _, _| base_expr.eval(&[u, v]));
            let q_lo = number(&sec.need("f.q_lo", &name)?)?;
            let q_hi = number(&sec.need("f.q_hi", &name)?)?;
            let r_inf = sec.take("f.ratio_inf").map(|e| number(&e)).transpose()?;
            let r_sup = sec.take("f.ratio_sup").map(|e| number(&e)).transpose()?;
            NonlinearityEnvelope::factored(f, base, q_lo, q_hi).with_ratio_bounds(r_inf, r_sup)
        }
        (None, Some(cap)) => NonlinearityEnvelope::sampled(f, number(&cap)?),
        (Some(b), Some(_)) => {
            return Err(Error::Syntax {
                line: b.line,
                message: format!("[{name}] gives both a factored and a sampled envelope"),
            })
        }
        (None, None) => {
            return Err(Error::Syntax {
                line: f_entry.line,
                message: format!("[{name}] needs `f.base` (with `f.q_lo`, `f.q_hi`) or `f.gradient_cap`"),
            })
        }
    };

    sec.finish(&name)?;
    Ok(EquationSpec {
        weight,
        bc,
        alpha,
        beta,
        window,
        envelope,
    })
}

fn missing(name: &str) -> Error {
    Error::Syntax {
        line: 1,
        message: format!("missing section [{name}]"),
    }
}

/// Parses and validates a problem from text.
pub fn parse_spec_str(src: &str) -> Result<ProblemSpec> {
    let mut sections = split_sections(src)?;

    let mut g = sections.remove("geometry").ok_or_else(|| missing("geometry"))?;
    let n_entry = g.need("n", "geometry")?;
    let n = number(&n_entry)?;
    if !(n.fract() == 0.0 && n >= 3.0 && n <= u32::MAX as f64) {
        return Err(Error::Syntax {
            line: n_entry.line,
            message: format!("dimension n = {n} must be an integer ≥ 3"),
        });
    }
    let r0_entry = g.need("r0", "geometry")?;
    let geom = ExteriorGeometry::new(n as u32, number(&r0_entry)?).map_err(|e| invalid(r0_entry.line, None, "r0>0", e))?;
    g.finish("geometry")?;

    let e1 = sections.remove("equation.1").ok_or_else(|| missing("equation.1"))?;
    let e2 = sections.remove("equation.2").ok_or_else(|| missing("equation.2"))?;
    let eq1 = equation(e1, 1, &geom)?;
    let eq2 = equation(e2, 2, &geom)?;

    let boxes = match sections.remove("boxes") {
        Some(mut b) => {
            let rho = pair(&b.need("rho", "boxes")?)?;
            let s = pair(&b.need("s", "boxes")?)?;
            let theta = b.take("theta").map(|e| pair(&e)).transpose()?;
            let line = b.line;
            b.finish("boxes")?;
            Some(BoxPair::new(rho, s, theta).map_err(|e| Error::Syntax {
                line,
                message: e.to_string(),
            })?)
        }
        None => None,
    };

    ProblemSpec::new(geom, [eq1, eq2], boxes)
}

/// Reads and validates a problem file.
pub fn parse_spec(path: &Path) -> Result<ProblemSpec> {
    let src = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_spec_str(&src)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_example() {
        let spec = parse_spec_str(EXAMPLE_SPEC).unwrap();
        let (e1, e2) = (spec.equation(0), spec.equation(1));
        assert_eq!((e1.bc.c(), e1.bc.d()), (2.0, 4.0));
        assert_eq!(e2.bc.c(), 3.0);
        assert!((e2.bc.d() - 0.2).abs() < 1e-15);
        for e in [e1, e2] {
            assert_eq!((e.window.a(), e.window.b()), (0.25, 0.5));
        }
        assert_eq!(spec.geometry().n(), 3);
        let b = spec.boxes().unwrap();
        assert_eq!(b.s, [2.0, 3.0]);
        assert!((b.rho[0] - 1.0 / 3.0).abs() < 1e-16);
        assert_eq!(spec.notes().len(), 2);
    }

    #[test]
    fn identity_functional_fails_with_named_assumption() {
        let src = EXAMPLE_SPEC
            .replacen("c = 2\nd_tilde = -4\nalpha.atoms = (1 @ 1/4)", "c = 1\nd_tilde = 0\nalpha.atoms = (1 @ 0)", 1);
        let err = parse_spec_str(&src).unwrap_err();
        assert!(err.violated_assumptions().contains(&"α[γ]<1"), "{err}");
        let Error::Validation(v) = err else { unreachable!() };
        assert_eq!(v[0].equation, Some(1));
    }

    #[test]
    fn empty_and_malformed_files() {
        assert!(matches!(parse_spec_str(""), Err(Error::Syntax { .. })));
        assert!(matches!(parse_spec_str("# only a comment\n"), Err(Error::Syntax { .. })));
        let bad = EXAMPLE_SPEC.replace("c = 3", "c = 3 +");
        match parse_spec_str(&bad) {
            Err(Error::Syntax { line, .. }) => assert_eq!(line, 22),
            other => panic!("{other:?}"),
        }
        let unknown = EXAMPLE_SPEC.replace("r0 = 1", "r0 = 1\nradius = 2");
        assert!(matches!(parse_spec_str(&unknown), Err(Error::Syntax { line: 7, .. })));
        let hdr = EXAMPLE_SPEC.replace("[boxes]", "[boxes");
        assert!(matches!(parse_spec_str(&hdr), Err(Error::Syntax { .. })));
    }

    #[test]
    fn both_d_forms_rejected() {
        let src = EXAMPLE_SPEC.replace("d_tilde = -4", "d_tilde = -4\nd = 4");
        assert!(matches!(parse_spec_str(&src), Err(Error::Syntax { .. })));
    }

    #[test]
    fn direct_d_and_density() {
        let src = EXAMPLE_SPEC
            .replace("d_tilde = -4", "d = 4")
            .replace("beta.atoms = (1 @ 1/2)\nwindow = 1/4, 1/2\nf = (2", "beta.atoms = (1/2 @ 1/2)\nbeta.density = (1/2 on 0 .. 1/2)\nwindow = 1/4, 1/2\nf = (2");
        let spec = parse_spec_str(&src).unwrap();
        assert_eq!(spec.equation(0).bc.d(), 4.0);
        assert_eq!(spec.equation(0).beta.density().len(), 1);
        assert_eq!(spec.notes().len(), 1);
    }

    #[test]
    fn every_violation_is_listed() {
        let src = EXAMPLE_SPEC
            .replace("f.q_lo = 1\n", "f.q_lo = 2\n")
            .replace("beta.atoms = (1 @ 1/2)\nwindow = 1/4, 1/2\nf = atan", "beta.atoms = (5 @ 1/2)\nwindow = 1/4, 1/2\nf = atan");
        let err = parse_spec_str(&src).unwrap_err();
        let names = err.violated_assumptions();
        assert!(names.contains(&"q_lo·base≤f≤q_hi·base"), "{names:?}");
        assert!(names.contains(&"D>0"), "{names:?}");
    }

    #[test]
    fn bad_window_and_power() {
        let src = EXAMPLE_SPEC.replacen("window = 1/4, 1/2", "window = 1/2, 3/4", 1);
        assert!(parse_spec_str(&src).unwrap_err().violated_assumptions().contains(&"0<a<b<1, a+b<1"));
        let src = EXAMPLE_SPEC.replacen("h.power = 4", "h.power = 2", 1);
        assert!(parse_spec_str(&src).unwrap_err().violated_assumptions().contains(&"μ>0"));
    }

    #[test]
    fn expression_weight() {
        let src = EXAMPLE_SPEC.replacen("h.power = 4", "h = r^(-4)\nmu = 1", 1);
        let spec = parse_spec_str(&src).unwrap();
        assert!((spec.weight_g(0).eval(0.3).unwrap() - 1.0).abs() < 1e-12);
    }
}
