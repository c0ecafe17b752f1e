//! The symmetric rational mass family `m(x) = ((α + x²)/(1 + x²))^k`, uniform
//! grids, sampled complex functions, and PT-symmetry diagnostics.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::format::{pair, sci, Sci};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MassDistribution {
    pub alpha: f64,
    pub exponent_k: f64,
}

impl MassDistribution {
    pub fn new(alpha: f64, exponent_k: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must be > 0, got {alpha}"
            )));
        }
        if !(exponent_k.is_finite() && exponent_k > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "mass exponent k must be > 0, got {exponent_k}"
            )));
        }
        Ok(Self { alpha, exponent_k })
    }

    /// Constant unit mass (α = 1).
    pub fn unit() -> Self {
        Self {
            alpha: 1.0,
            exponent_k: 1.0,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.alpha == 1.0
    }

    fn base(&self, x: f64) -> f64 {
        let x2 = x * x;
        (self.alpha + x2) / (1.0 + x2)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.base(x).powf(self.exponent_k)
    }

    /// `m^p` without forming `m` first.
    pub fn pow(&self, x: f64, p: f64) -> f64 {
        self.base(x).powf(self.exponent_k * p)
    }

    /// Closed-form `(m'/m, m''/m)`.
    pub fn log_derivs(&self, x: f64) -> (f64, f64) {
        let (a, k) = (self.alpha, self.exponent_k);
        let x2 = x * x;
        let pa = a + x2;
        let p1 = 1.0 + x2;
        let d1 = 2.0 * k * (1.0 - a) * x / (pa * p1);
        let ln2 = 2.0 * k * ((a - x2) / (pa * pa) - (1.0 - x2) / (p1 * p1));
        (d1, ln2 + d1 * d1)
    }

    /// Whether `m^{γ/2} = (α + x²)/(1 + x²)` so that the coordinate map has a
    /// closed form.
    pub fn closed_form_map(&self, gamma: f64) -> bool {
        (self.exponent_k * gamma / 2.0 - 1.0).abs() < 1e-12
    }

    /// `y(x) = ∫_0^x m^{γ/2}(t) dt`; odd and strictly increasing.
    pub fn coordinate_y(&self, gamma: f64, x: f64) -> f64 {
        if gamma == 0.0 || self.is_constant() {
            return x;
        }
        if self.closed_form_map(gamma) {
            return x + (self.alpha - 1.0) * x.atan();
        }
        let half = gamma / 2.0;
        x.signum() * integrate(|t| self.pow(t, half), x.abs())
    }

    /// `dy/dx = m^{γ/2}`.
    pub fn coordinate_slope(&self, gamma: f64, x: f64) -> f64 {
        self.pow(x, gamma / 2.0)
    }

    /// Inverse of [`coordinate_y`](Self::coordinate_y) by safeguarded Newton.
    pub fn coordinate_x(&self, gamma: f64, y: f64) -> Result<f64> {
        if !y.is_finite() {
            return Err(Error::NonFinite("coordinate_x argument"));
        }
        if gamma == 0.0 || self.is_constant() || y == 0.0 {
            return Ok(y);
        }
        // slope lies between 1 and α^{kγ/2}
        let s_end = self.alpha.powf(self.exponent_k * gamma / 2.0);
        let (s_min, s_max) = (s_end.min(1.0), s_end.max(1.0));
        let target = y.abs();
        let (mut lo, mut hi) = (target / s_max, target / s_min);
        let mut x = 0.5 * (lo + hi);
        const MAX_ITER: usize = 200;
        for _ in 0..MAX_ITER {
            let f = self.coordinate_y(gamma, x) - target;
            if f.abs() < 1e-13 * target.max(1.0) {
                return Ok(y.signum() * x);
            }
            if f > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let newton = x - f / self.coordinate_slope(gamma, x);
            x = if newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if hi - lo < f64::EPSILON * hi {
                return Ok(y.signum() * x);
            }
        }
        Err(Error::Convergence {
            context: "coordinate_x",
            iterations: MAX_ITER,
        })
    }
}

// Composite 10-point Gauss–Legendre on [0, upper].
fn integrate(f: impl Fn(f64) -> f64, upper: f64) -> f64 {
    const NODES: [f64; 5] = [
        0.148_874_338_981_631_2,
        0.433_395_394_129_247_2,
        0.679_409_568_299_024_4,
        0.865_063_366_688_984_5,
        0.973_906_528_517_171_7,
    ];
    const WEIGHTS: [f64; 5] = [
        0.295_524_224_714_752_9,
        0.269_266_719_309_996_4,
        0.219_086_362_515_982,
        0.149_451_349_150_580_6,
        0.066_671_344_308_688_1,
    ];
    if upper == 0.0 {
        return 0.0;
    }
    let panels = (upper / 0.125).ceil().max(1.0) as usize;
    let width = upper / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * width;
        let half = 0.5 * width;
        let mut acc = 0.0;
        for (&t, &w) in NODES.iter().zip(&WEIGHTS) {
            acc += w * (f(mid - half * t) + f(mid + half * t));
        }
        total += acc * half;
    }
    total
}

/// Uniform grid on `[lower, upper]` with `num_points` nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    lower: f64,
    upper: f64,
    num_points: usize,
}

impl GridSpec {
    /// Grid on `[-L, L]`. Nodes are placed as exact mirror images.
    pub fn symmetric(half_width: f64, num_points: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "L must be > 0, got {half_width}"
            )));
        }
        Self::new(-half_width, half_width, num_points)
    }

    pub fn new(lower: f64, upper: f64, num_points: usize) -> Result<Self> {
        if num_points < 3 {
            return Err(Error::InvalidParameter(format!(
                "N must be >= 3, got {num_points}"
            )));
        }
        if !(lower.is_finite() && upper.is_finite() && upper > lower) {
            return Err(Error::InvalidParameter(format!(
                "bad interval [{lower}, {upper}]"
            )));
        }
        Ok(Self {
            lower,
            upper,
            num_points,
        })
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.upper - self.lower)
    }

    pub fn len(&self) -> usize {
        self.num_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        (self.upper - self.lower) / (self.num_points - 1) as f64
    }

    pub fn point(&self, j: usize) -> f64 {
        let center = 0.5 * (self.lower + self.upper);
        let half = 0.5 * (self.num_points - 1) as f64;
        center + (j as f64 - half) * self.spacing()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.num_points).map(|j| self.point(j)).collect()
    }

    pub fn is_symmetric(&self) -> bool {
        (self.lower + self.upper).abs() <= 1e-12 * self.upper.abs().max(1.0)
    }

    /// Grid with spacing `2h` over the same interval; requires odd `N`.
    pub fn coarsened(&self) -> Result<Self> {
        if self.num_points.is_multiple_of(2) || self.num_points < 5 {
            return Err(Error::InvalidParameter(format!(
                "coarsening needs odd N >= 5, got {}",
                self.num_points
            )));
        }
        Self::new(self.lower, self.upper, self.num_points.div_ceil(2))
    }

    /// Grid with spacing `h/2` over the same interval (`2N - 1` nodes).
    pub fn refined(&self) -> Self {
        Self {
            num_points: 2 * self.num_points - 1,
            ..*self
        }
    }

    /// Index of the node nearest to `x`.
    pub fn nearest(&self, x: f64) -> usize {
        let j = ((x - self.lower) / self.spacing()).round();
        j.clamp(0.0, (self.num_points - 1) as f64) as usize
    }
}

impl Serialize for GridSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("GridSpec", 4)?;
        st.serialize_field("lower", &Sci(self.lower))?;
        st.serialize_field("upper", &Sci(self.upper))?;
        st.serialize_field("N", &self.num_points)?;
        st.serialize_field("h", &Sci(self.spacing()))?;
        st.end()
    }
}

/// Complex samples on a grid. Immutable once built; all values finite.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    grid: GridSpec,
    values: Vec<Complex64>,
    label: String,
}

impl SampledFunction {
    pub fn new(grid: GridSpec, values: Vec<Complex64>, label: impl Into<String>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "{} samples for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        if values
            .iter()
            .any(|v| !(v.re.is_finite() && v.im.is_finite()))
        {
            return Err(Error::NonFinite("sampled function"));
        }
        Ok(Self {
            grid,
            values,
            label: label.into(),
        })
    }

    pub fn from_fn(
        grid: GridSpec,
        label: impl Into<String>,
        f: impl Fn(f64) -> Result<Complex64>,
    ) -> Result<Self> {
        let values = grid
            .points()
            .into_iter()
            .map(f)
            .collect::<Result<Vec<_>>>()?;
        Self::new(grid, values, label)
    }

    pub fn from_real(
        grid: GridSpec,
        label: impl Into<String>,
        f: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        Self::from_fn(grid, label, |x| Ok(Complex64::new(f(x), 0.0)))
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn max_abs_diff(&self, other: &SampledFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// CSV with `#`-prefixed header lines, then `x,re,im`.
    pub fn to_csv(&self, header: &[String]) -> String {
        let mut out = String::new();
        for line in header {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
        out.push_str(&format!("# label: {}\n", self.label));
        out.push_str("x,re,im\n");
        for (x, v) in self.grid.points().into_iter().zip(&self.values) {
            out.push_str(&format!("{},{},{}\n", sci(x), sci(v.re), sci(v.im)));
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("sampled function serializes")
    }
}

impl Serialize for SampledFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let values: Vec<[Sci; 2]> = self.values.iter().map(|&v| pair(v)).collect();
        let mut st = s.serialize_struct("SampledFunction", 3)?;
        st.serialize_field("label", &self.label)?;
        st.serialize_field("grid", &self.grid)?;
        st.serialize_field("values", &values)?;
        st.end()
    }
}

/// `max_j |f*(-x_j) - f(x_j)|`; zero exactly when the samples are PT-symmetric.
pub fn pt_defect(f: &SampledFunction) -> Result<f64> {
    let grid = f.grid();
    if !grid.is_symmetric() {
        return Err(Error::GridAsymmetry {
            lower: grid.lower(),
            upper: grid.upper(),
        });
    }
    let v = f.values();
    let n = v.len();
    Ok((0..n)
        .map(|j| (v[n - 1 - j].conj() - v[j]).norm())
        .fold(0.0, f64::max))
}
