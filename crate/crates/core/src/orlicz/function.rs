use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use super::quad;
use crate::error::{Error, Result};
use crate::roots;

/// Points in the validation grid.
const VALIDATION_GRID: usize = 2000;
/// Resolution of the grid used to locate where `t^{1+|log t|}` stops being convex.
const LT_CONVEXITY_GRID: usize = 100_000;
/// Relative slack allowed in grid monotonicity checks.
const GRID_SLACK: f64 = 1e-12;

/// A parsed function-family string such as `power:p=2` or `smooth(lt)`.
#[derive(Debug, Clone, PartialEq)]
pub enum FamilySpec {
    /// `t^p / p`.
    Power(f64),
    /// `t^{1+|log t|}` near zero, extended quadratically past its convex range.
    Lt,
    /// `t`.
    Linear,
    /// `∫_0^t (1+u) M_1'(u) du` for the inner family `M_1`.
    Smooth(Box<FamilySpec>),
    /// Piecewise-linear derivative read from a `t,Mprime` CSV file.
    Tabulated(PathBuf),
}

impl FromStr for FamilySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidSpec(s.to_string());
        if s == "lt" || s == "lt_example" {
            return Ok(FamilySpec::Lt);
        }
        if s == "linear" {
            return Ok(FamilySpec::Linear);
        }
        if let Some(rest) = s.strip_prefix("power:") {
            let p = rest.strip_prefix("p=").ok_or_else(bad)?;
            let p: f64 = p.trim().parse().map_err(|_| bad())?;
            if !p.is_finite() {
                return Err(bad());
            }
            return Ok(FamilySpec::Power(p));
        }
        if let Some(rest) = s.strip_prefix("smooth(") {
            let inner = rest.strip_suffix(')').ok_or_else(bad)?;
            return Ok(FamilySpec::Smooth(Box::new(inner.parse()?)));
        }
        if let Some(rest) = s.strip_prefix("tabulated:") {
            let path = rest.strip_prefix("file=").ok_or_else(bad)?;
            if path.is_empty() {
                return Err(bad());
            }
            return Ok(FamilySpec::Tabulated(PathBuf::from(path)));
        }
        Err(bad())
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilySpec::Power(p) => write!(f, "power:p={p}"),
            FamilySpec::Lt => f.write_str("lt"),
            FamilySpec::Linear => f.write_str("linear"),
            FamilySpec::Smooth(inner) => write!(f, "smooth({inner})"),
            FamilySpec::Tabulated(path) => write!(f, "tabulated:file={}", path.display()),
        }
    }
}

/// Quadratic continuation `M(T) + M'(T)(t-T) + c(t-T)^2/2` used past the domain bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extension {
    pub at: f64,
    pub value: f64,
    pub slope: f64,
    pub curvature: f64,
}

impl Extension {
    fn new(at: f64, value: f64, slope: f64) -> Self {
        let curvature = if slope > 0.0 { slope / at } else { 1.0 };
        Self {
            at,
            value,
            slope,
            curvature,
        }
    }

    fn value(&self, t: f64) -> f64 {
        let d = t - self.at;
        self.value + self.slope * d + 0.5 * self.curvature * d * d
    }

    fn derivative(&self, t: f64) -> f64 {
        self.slope + self.curvature * (t - self.at)
    }
}

/// Parameters `(ε, s)` of the summability hypothesis attached to an instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SummabilityParams {
    pub eps: f64,
    pub s: f64,
}

#[derive(Debug, Clone)]
struct Table {
    knots: Vec<f64>,
    slopes: Vec<f64>,
    /// `M` at each knot.
    cumulative: Vec<f64>,
}

impl Table {
    fn segment(&self, t: f64) -> usize {
        match self.knots.binary_search_by(|k| k.total_cmp(&t)) {
            Ok(i) => i.min(self.knots.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.knots.len() - 2),
        }
    }

    fn derivative(&self, t: f64) -> f64 {
        if t <= self.knots[0] {
            return self.slopes[0];
        }
        let i = self.segment(t);
        let (k0, k1) = (self.knots[i], self.knots[i + 1]);
        let (s0, s1) = (self.slopes[i], self.slopes[i + 1]);
        s0 + (s1 - s0) * (t - k0) / (k1 - k0)
    }

    fn value(&self, t: f64) -> f64 {
        if t <= self.knots[0] {
            return self.slopes[0] * t;
        }
        let i = self.segment(t);
        let (k0, k1) = (self.knots[i], self.knots[i + 1]);
        let (s0, s1) = (self.slopes[i], self.slopes[i + 1]);
        let d = t - k0;
        self.cumulative[i] + s0 * d + 0.5 * (s1 - s0) / (k1 - k0) * d * d
    }
}

#[derive(Debug, Clone)]
enum Shape {
    Power {
        p: f64,
    },
    Lt,
    Linear,
    Smooth {
        inner: Box<OrliczFunction>,
    },
    Tabulated(Table),
    Scaled {
        inner: Box<OrliczFunction>,
        arg: f64,
        value: f64,
    },
}

/// A convex non-decreasing `M` on `[0, ∞)` with `M(0) = 0`.
///
/// Each instance carries a domain bound `T`. Closed-form families use
/// `T = ∞`; the others are continued past `T` by an [`Extension`] so that the
/// derivative grows without bound.
#[derive(Debug, Clone)]
pub struct OrliczFunction {
    label: String,
    shape: Shape,
    domain: f64,
    extension: Option<Extension>,
    summability: Option<SummabilityParams>,
}

/// Serializable summary of an instance.
#[derive(Debug, Clone, Serialize)]
pub struct FunctionInfo {
    pub label: String,
    pub domain_bound: Option<f64>,
    pub extension: Option<Extension>,
    pub summability: Option<SummabilityParams>,
}

fn lt_raw_value(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let l = t.ln();
    (l + l * l.abs()).exp()
}

fn lt_raw_derivative(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let l = t.ln();
    (l * l.abs()).exp() * (1.0 + 2.0 * l.abs())
}

/// Largest grid point of `(0, 1]` up to which the derivative of
/// `t^{1+|log t|}` is non-decreasing.
fn lt_convex_bound() -> f64 {
    let mut prev = 0.0;
    for i in 1..=LT_CONVEXITY_GRID {
        let t = i as f64 / LT_CONVEXITY_GRID as f64;
        let d = lt_raw_derivative(t);
        if d < prev {
            return (i - 1) as f64 / LT_CONVEXITY_GRID as f64;
        }
        prev = d;
    }
    1.0
}

impl OrliczFunction {
    fn build(label: String, shape: Shape, domain: f64) -> Self {
        let mut f = Self {
            label,
            shape,
            domain,
            extension: None,
            summability: None,
        };
        if domain.is_finite() {
            f.extension = Some(Extension::new(
                domain,
                f.raw_value(domain),
                f.raw_derivative(domain),
            ));
        }
        f
    }

    /// `t^p / p`. Rejects exponents below 1 (not convex).
    pub fn power(p: f64) -> Result<Self> {
        if !(p.is_finite() && p > 0.0) {
            return Err(Error::InvalidArgument(format!("power exponent {p}")));
        }
        let f = Self::build(
            FamilySpec::Power(p).to_string(),
            Shape::Power { p },
            f64::INFINITY,
        );
        f.validate()?;
        Ok(f)
    }

    /// `M(t) = t`.
    pub fn linear() -> Self {
        Self::build("linear".into(), Shape::Linear, f64::INFINITY)
    }

    /// `t^{1+|log t|}` on the part of `(0, 1]` where it is convex, continued
    /// quadratically beyond.
    pub fn lt() -> Result<Self> {
        let bound = lt_convex_bound();
        let mut f = Self::build("lt".into(), Shape::Lt, bound);
        f.summability = Some(SummabilityParams { eps: 0.5, s: 0.5 });
        f.validate()?;
        Ok(f)
    }

    /// Piecewise-linear derivative through `(knots[i], slopes[i])`.
    ///
    /// Left of the first knot the derivative is held at `slopes[0]`.
    pub fn tabulated(knots: Vec<f64>, slopes: Vec<f64>) -> Result<Self> {
        Self::tabulated_labeled(knots, slopes, "tabulated".into())
    }

    fn tabulated_labeled(knots: Vec<f64>, slopes: Vec<f64>, label: String) -> Result<Self> {
        if knots.len() != slopes.len() || knots.len() < 2 {
            return Err(Error::InvalidArgument(
                "tabulated derivative needs at least two (t, Mprime) rows".into(),
            ));
        }
        if knots[0] < 0.0 || knots.iter().chain(&slopes).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "tabulated rows must be finite with t >= 0".into(),
            ));
        }
        for (i, w) in knots.windows(2).enumerate() {
            if w[1] <= w[0] {
                return Err(Error::InvalidArgument(format!(
                    "tabulated t values must increase strictly (row {})",
                    i + 2
                )));
            }
        }
        if slopes[0] < 0.0 {
            return Err(Error::NotMonotone {
                lo: 0.0,
                hi: knots[0],
            });
        }
        for i in 0..slopes.len() - 1 {
            if slopes[i + 1] < slopes[i] {
                return Err(Error::NotConvex {
                    lo: knots[i],
                    hi: knots[i + 1],
                });
            }
        }
        let mut cumulative = vec![slopes[0] * knots[0]];
        for i in 0..knots.len() - 1 {
            let h = knots[i + 1] - knots[i];
            cumulative.push(cumulative[i] + 0.5 * h * (slopes[i] + slopes[i + 1]));
        }
        let domain = *knots.last().unwrap();
        let f = Self::build(
            label,
            Shape::Tabulated(Table {
                knots,
                slopes,
                cumulative,
            }),
            domain,
        );
        f.validate()?;
        Ok(f)
    }

    /// Reads `t,Mprime` rows. A header line is allowed.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let io_err = |e: &dyn fmt::Display| Error::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        };
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| io_err(&e))?;
        let (mut knots, mut slopes) = (Vec::new(), Vec::new());
        for (row, record) in reader.records().enumerate() {
            let record = record.map_err(|e| io_err(&e))?;
            if record.len() != 2 {
                return Err(io_err(&format!(
                    "row {} has {} fields",
                    row + 1,
                    record.len()
                )));
            }
            match (record[0].parse::<f64>(), record[1].parse::<f64>()) {
                (Ok(t), Ok(d)) => {
                    knots.push(t);
                    slopes.push(d);
                }
                _ if row == 0 => continue,
                _ => return Err(io_err(&format!("row {} is not numeric", row + 1))),
            }
        }
        let label = FamilySpec::Tabulated(path.to_path_buf()).to_string();
        Self::tabulated_labeled(knots, slopes, label)
    }

    /// `c · M(k t)`.
    pub fn scaled(&self, arg: f64, value: f64) -> Self {
        assert!(arg > 0.0 && value > 0.0, "scale factors must be positive");
        let mut f = Self::build(
            format!("scaled({}, arg={arg}, value={value})", self.label),
            Shape::Scaled {
                inner: Box::new(self.clone()),
                arg,
                value,
            },
            f64::INFINITY,
        );
        f.domain = self.domain / arg;
        f
    }

    /// `M(k t)` with `k` chosen so that the result takes the value 1 at 1.
    pub fn normalized(&self) -> Result<Self> {
        let at_one = self.value(1.0);
        if (at_one - 1.0).abs() <= 4.0 * f64::EPSILON {
            return Ok(self.clone());
        }
        let hi = roots::expand_until(|t| self.value(t) >= 1.0, 1.0, 2.0, 1100, "M(k) = 1")?;
        let lo = if hi > 1.0 { hi / 2.0 } else { 0.0 };
        let lo = if lo == 0.0 {
            roots::expand_until(|t| self.value(t) < 1.0, 1.0, 0.5, 1100, "M(k) = 1")?
        } else {
            lo
        };
        let k = roots::bisect(|t| self.value(t) >= 1.0, lo, hi);
        Ok(self.scaled(k, 1.0))
    }

    pub fn with_summability(mut self, eps: f64, s: f64) -> Self {
        self.summability = Some(SummabilityParams { eps, s });
        self
    }

    pub fn summability(&self) -> Option<SummabilityParams> {
        self.summability
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// The bound `T` past which the extension rule applies (`∞` if none).
    pub fn domain_bound(&self) -> f64 {
        self.domain
    }

    pub fn extension(&self) -> Option<Extension> {
        self.extension
    }

    pub fn info(&self) -> FunctionInfo {
        FunctionInfo {
            label: self.label.clone(),
            domain_bound: self.domain.is_finite().then_some(self.domain),
            extension: self.extension,
            summability: self.summability,
        }
    }

    /// True for the power family with exponent at most 1.
    pub(crate) fn power_exponent(&self) -> Option<f64> {
        match &self.shape {
            Shape::Power { p } => Some(*p),
            _ => None,
        }
    }

    fn raw_value(&self, t: f64) -> f64 {
        match &self.shape {
            Shape::Power { p } => t.powf(*p) / p,
            Shape::Lt => lt_raw_value(t),
            Shape::Linear => t,
            Shape::Smooth { inner } => Self::smooth_integral(inner, t).0,
            Shape::Tabulated(table) => table.value(t),
            Shape::Scaled { inner, arg, value } => value * inner.value(arg * t),
        }
    }

    fn raw_derivative(&self, t: f64) -> f64 {
        match &self.shape {
            Shape::Power { p } => t.powf(p - 1.0),
            Shape::Lt => lt_raw_derivative(t),
            Shape::Linear => 1.0,
            Shape::Smooth { inner } => (1.0 + t) * inner.derivative(t),
            Shape::Tabulated(table) => table.derivative(t),
            Shape::Scaled { inner, arg, value } => value * arg * inner.derivative(arg * t),
        }
    }

    fn smooth_integral(inner: &OrliczFunction, t: f64) -> (f64, f64) {
        let breaks = inner.breakpoints(t);
        quad::integrate(|u| (1.0 + u) * inner.derivative(u), 0.0, t, &breaks)
    }

    /// `M(t)` for `t >= 0`; negative arguments evaluate to 0.
    pub fn value(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match self.extension {
            Some(ext) if t > ext.at => ext.value(t),
            _ => self.raw_value(t),
        }
    }

    /// Right derivative `M'(t)`.
    pub fn derivative(&self, t: f64) -> f64 {
        let t = t.max(0.0);
        match self.extension {
            Some(ext) if t >= ext.at => ext.derivative(t),
            _ => self.raw_derivative(t),
        }
    }

    /// Points in `(0, upto)` where `M'` may fail to be smooth.
    pub fn breakpoints(&self, upto: f64) -> Vec<f64> {
        let mut out = Vec::new();
        if let Some(ext) = self.extension {
            out.push(ext.at);
        }
        match &self.shape {
            Shape::Smooth { inner } => out.extend(inner.breakpoints(upto)),
            Shape::Tabulated(table) => out.extend(table.knots.iter().copied()),
            Shape::Scaled { inner, arg, .. } => {
                out.extend(inner.breakpoints(upto * arg).into_iter().map(|b| b / arg))
            }
            _ => {}
        }
        out.retain(|&b| b > 0.0 && b < upto);
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    fn validation_span(&self) -> f64 {
        if self.domain.is_finite() {
            2.0 * self.domain
        } else {
            4.0
        }
    }

    /// Checks `M(0) = 0` and that `M` and `M'` are non-decreasing on a grid.
    pub fn validate(&self) -> Result<()> {
        let at_zero = self.value(0.0);
        if at_zero != 0.0 {
            return Err(Error::NonzeroAtOrigin(at_zero));
        }
        let span = self.validation_span();
        let step = span / VALIDATION_GRID as f64;
        let (mut prev_v, mut prev_d) = (0.0f64, self.derivative(0.0));
        if !(prev_d >= 0.0) {
            return Err(Error::NotMonotone { lo: 0.0, hi: step });
        }
        for i in 1..=VALIDATION_GRID {
            let t = i as f64 * step;
            let (v, d) = (self.value(t), self.derivative(t));
            if !(v >= prev_v - GRID_SLACK * prev_v.abs()) {
                return Err(Error::NotMonotone {
                    lo: t - step,
                    hi: t,
                });
            }
            if !(d >= prev_d - GRID_SLACK * prev_d.abs()) {
                return Err(Error::NotConvex {
                    lo: t - step,
                    hi: t,
                });
            }
            prev_v = v;
            prev_d = d;
        }
        Ok(())
    }

    /// Whether `M(t) > 0` at every positive grid point.
    pub fn is_non_degenerate(&self) -> bool {
        let span = self.validation_span();
        (1..=VALIDATION_GRID).all(|i| self.value(i as f64 * span / VALIDATION_GRID as f64) > 0.0)
            && self.value(1e-3 * span / VALIDATION_GRID as f64) > 0.0
    }

    /// Checks that `M'` is a bijection of `[0, ∞)`: zero at the origin and
    /// strictly increasing on the validation grid.
    pub fn check_regular(&self) -> Result<()> {
        if let Some(p) = self.power_exponent() {
            if p <= 1.0 {
                return Err(Error::PowerExponent(p));
            }
        }
        let span = self.validation_span();
        let step = span / VALIDATION_GRID as f64;
        let mut prev = self.derivative(step);
        for i in 2..=VALIDATION_GRID {
            let t = i as f64 * step;
            let d = self.derivative(t);
            if d <= prev {
                return Err(Error::FlatDerivative {
                    lo: t - step,
                    hi: t,
                });
            }
            prev = d;
        }
        let at_zero = self.derivative(0.0);
        if at_zero != 0.0 {
            return Err(Error::DerivativeAtOrigin(at_zero));
        }
        Ok(())
    }
}

/// `M(t) = ∫_0^t (1+u) M_1'(u) du`, using right derivatives of `M_1`.
pub fn smooth(inner: &OrliczFunction) -> Result<OrliczFunction> {
    if !inner.is_non_degenerate() {
        return Err(Error::InvalidArgument(format!(
            "smoothing needs a non-degenerate function, got {}",
            inner.label()
        )));
    }
    let f = OrliczFunction::build(
        format!("smooth({})", inner.label()),
        Shape::Smooth {
            inner: Box::new(inner.clone()),
        },
        f64::INFINITY,
    );
    let span = f.validation_span();
    for i in 1..=64 {
        let t = span * i as f64 / 64.0;
        let (_, rel) = OrliczFunction::smooth_integral(inner, t);
        if rel > quad::ACCEPT {
            return Err(Error::Quadrature {
                lo: 0.0,
                hi: t,
                estimate: rel,
            });
        }
    }
    f.validate()?;
    Ok(f)
}

/// Builds the instance described by a family string.
pub fn make_family(spec: &FamilySpec) -> Result<OrliczFunction> {
    match spec {
        FamilySpec::Power(p) => OrliczFunction::power(*p),
        FamilySpec::Lt => OrliczFunction::lt(),
        FamilySpec::Linear => Ok(OrliczFunction::linear()),
        FamilySpec::Smooth(inner) => smooth(&make_family(inner)?),
        FamilySpec::Tabulated(path) => OrliczFunction::from_csv(path),
    }
}
