//! Constant-mass reference problems `-κ φ'' + Ω φ = E φ`: the PT-symmetric
//! Scarf II potential and the PT-symmetric generalized harmonic oscillator.

use std::fmt;

use num_complex::Complex64;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::format::Sci;
use crate::specfun::{complex_pow, gamma_c, jacobi_poly, laguerre_poly, sech_tanh};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Kinetic prefactor of the wave equation.
///
/// `Half` is `-(1/2) d²/dy² + Ω`, `Unit` is `-d²/dy² + Ω`. For the
/// position-dependent operator the same factor multiplies `1/m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpectrumConvention {
    Half,
    Unit,
}

impl SpectrumConvention {
    pub const ALL: [SpectrumConvention; 2] = [SpectrumConvention::Half, SpectrumConvention::Unit];

    pub fn kinetic_factor(self) -> f64 {
        match self {
            SpectrumConvention::Half => 0.5,
            SpectrumConvention::Unit => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SpectrumConvention::Half => "half",
            SpectrumConvention::Unit => "unit",
        }
    }

    /// Closed-form energies are quoted for `Unit`; `Half` takes half of them.
    pub fn scale_energy(self, unit_energy: Complex64) -> Complex64 {
        match self {
            SpectrumConvention::Half => unit_energy * 0.5,
            SpectrumConvention::Unit => unit_energy,
        }
    }
}

impl fmt::Display for SpectrumConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for SpectrumConvention {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn from_int(v: i64) -> Result<Self> {
        match v {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            _ => Err(Error::InvalidParameter(format!(
                "sign must be +1 or -1, got {v}"
            ))),
        }
    }

    pub fn as_int(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

impl Serialize for Sign {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_i8(self.as_int())
    }
}

/// Signs in `p = -1/4 ± t/2`, `q = -1/4 ± s/2`.
///
/// The default `(+, +)` is the branch on which `z^{-p} (z*)^{-q}` decays,
/// i.e. the one that carries the bound states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BranchSelection {
    pub sign_p: Sign,
    pub sign_q: Sign,
}

impl Default for BranchSelection {
    fn default() -> Self {
        Self {
            sign_p: Sign::Plus,
            sign_q: Sign::Plus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchParams {
    pub p: Complex64,
    pub q: Complex64,
    pub s: Complex64,
    pub t: Complex64,
}

/// Which closed form to use for Scarf II energies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScarfFormula {
    /// `E_n = -(n - p - 1)²`, as commonly quoted.
    Verbatim,
    /// `E_n = -(n + 1/2 - (s + t)/2)²`, symmetric in `s` and `t`.
    Corrected,
}

impl ScarfFormula {
    pub const ALL: [ScarfFormula; 2] = [ScarfFormula::Verbatim, ScarfFormula::Corrected];

    pub fn name(self) -> &'static str {
        match self {
            ScarfFormula::Verbatim => "verbatim",
            ScarfFormula::Corrected => "corrected",
        }
    }
}

impl Serialize for ScarfFormula {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

/// `Ω(y) = -λ sech² y - i μ sech y tanh y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScarfII {
    pub lambda: f64,
    pub mu: f64,
}

impl ScarfII {
    pub fn new(lambda: f64, mu: f64) -> Result<Self> {
        if !(lambda.is_finite() && mu.is_finite()) {
            return Err(Error::NonFinite("Scarf II parameters"));
        }
        Ok(Self { lambda, mu })
    }

    pub fn omega(&self, y: f64) -> Complex64 {
        let (sech, tanh) = sech_tanh(y);
        Complex64::new(-self.lambda * sech * sech, -self.mu * sech * tanh)
    }

    pub fn branch_params(&self, sel: BranchSelection) -> BranchParams {
        let t = Complex64::new(0.25 + self.lambda + self.mu, 0.0).sqrt();
        let s = Complex64::new(0.25 + self.lambda - self.mu, 0.0).sqrt();
        BranchParams {
            p: -0.25 + sel.sign_p.value() * t * 0.5,
            q: -0.25 + sel.sign_q.value() * s * 0.5,
            s,
            t,
        }
    }

    /// Real `s + t`, or `None` when either root is imaginary.
    fn real_s_plus_t(&self) -> Option<f64> {
        let a = 0.25 + self.lambda + self.mu;
        let b = 0.25 + self.lambda - self.mu;
        (a >= 0.0 && b >= 0.0).then(|| a.sqrt() + b.sqrt())
    }

    /// `(s + t - 1)/2`; levels obey `n < limit`.
    pub fn bound_limit(&self) -> Option<f64> {
        self.real_s_plus_t().map(|st| 0.5 * (st - 1.0))
    }

    pub fn bound_count(&self) -> usize {
        match self.bound_limit() {
            Some(l) if l > 0.0 => l.ceil() as usize,
            _ => 0,
        }
    }

    fn check_level(&self, n: usize) -> Result<()> {
        let limit = self.bound_limit().ok_or_else(|| {
            Error::InvalidParameter(format!(
                "s or t is not real for lambda = {}, mu = {} (PT-broken candidate)",
                self.lambda, self.mu
            ))
        })?;
        if (n as f64) < limit {
            Ok(())
        } else {
            Err(Error::OutOfBoundStateRange { n, limit })
        }
    }

    pub fn energy(
        &self,
        sel: BranchSelection,
        n: usize,
        conv: SpectrumConvention,
        formula: ScarfFormula,
    ) -> Result<EnergyLevel> {
        self.check_level(n)?;
        let nf = n as f64;
        let unit = match formula {
            ScarfFormula::Verbatim => {
                let p = self.branch_params(sel).p;
                let d = nf - p - 1.0;
                -(d * d)
            }
            ScarfFormula::Corrected => {
                let st = self.real_s_plus_t().expect("checked above");
                let d = nf + 0.5 - 0.5 * st;
                Complex64::new(-(d * d), 0.0)
            }
        };
        Ok(EnergyLevel {
            n,
            energy: conv.scale_energy(unit),
            quasi_parity: None,
            convention: conv,
        })
    }

    /// Unnormalized `Γ(n-2p+1/4)/(n! Γ(1/2-2p)) z^{-p} (z*)^{-q} P_n^{(-2p-1/2, -2q-1/2)}(i sinh y)`
    /// with `z = (1 - i sinh y)/2` and `z* = (1 + i sinh y)/2` taken as the
    /// formal conjugate, so the result is analytic in `y`.
    pub fn wavefunction(&self, sel: BranchSelection, n: usize, y: f64) -> Result<Complex64> {
        self.check_level(n)?;
        let BranchParams { p, q, .. } = self.branch_params(sel);
        let nf = n as f64;
        let factorial: f64 = (1..=n).map(|k| k as f64).product();
        let prefactor = gamma_c(nf - 2.0 * p + 0.25)? / (factorial * gamma_c(0.5 - 2.0 * p)?);
        let arg = I * y.sinh();
        let z = (1.0 - arg) * 0.5;
        let zc = (1.0 + arg) * 0.5;
        let poly = jacobi_poly(n, -2.0 * p - 0.5, -2.0 * q - 0.5, arg)?;
        Ok(prefactor * complex_pow(z, -p)? * complex_pow(zc, -q)? * poly)
    }
}

/// `Ω(y) = (y - iε)² + (g² - 1/4)/(y - iε)²` with quasi-parity `q = ±1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenOscillator {
    pub g: f64,
    pub epsilon: f64,
    pub quasi_parity: Sign,
}

const SINGULAR_TOL: f64 = 1e-12;

impl GenOscillator {
    pub fn new(g: f64, epsilon: f64, quasi_parity: Sign) -> Result<Self> {
        if !(g.is_finite() && epsilon.is_finite()) {
            return Err(Error::NonFinite("oscillator parameters"));
        }
        if g <= 0.0 {
            return Err(Error::InvalidParameter(format!("g must be > 0, got {g}")));
        }
        Ok(Self {
            g,
            epsilon,
            quasi_parity,
        })
    }

    pub fn with_parity(&self, quasi_parity: Sign) -> Self {
        Self {
            quasi_parity,
            ..*self
        }
    }

    fn centrifugal(&self) -> f64 {
        self.g * self.g - 0.25
    }

    fn shifted(&self, y: f64) -> Result<Complex64> {
        let r = Complex64::new(y, -self.epsilon);
        if r.norm() < SINGULAR_TOL && self.centrifugal() != 0.0 {
            return Err(Error::Singularity {
                y,
                tol: SINGULAR_TOL,
            });
        }
        Ok(r)
    }

    pub fn omega(&self, y: f64) -> Result<Complex64> {
        let r = self.shifted(y)?;
        let r2 = r * r;
        if self.centrifugal() == 0.0 {
            return Ok(r2);
        }
        Ok(r2 + self.centrifugal() / r2)
    }

    pub fn energy(&self, n: usize, conv: SpectrumConvention) -> EnergyLevel {
        let q = self.quasi_parity.value();
        let unit = 4.0 * n as f64 - 2.0 * q * self.g + 2.0;
        EnergyLevel {
            n,
            energy: conv.scale_energy(Complex64::new(unit, 0.0)),
            quasi_parity: Some(self.quasi_parity.as_int()),
            convention: conv,
        }
    }

    /// `exp(-r²/2) r^{-qg+1/2} L_n^{(-qg)}(r²)`, `r = y - iε`, principal power.
    pub fn wavefunction(&self, n: usize, y: f64) -> Result<Complex64> {
        let r = self.shifted(y)?;
        let qg = self.quasi_parity.value() * self.g;
        let r2 = r * r;
        let power = complex_pow(r, Complex64::new(0.5 - qg, 0.0))?;
        Ok((-0.5 * r2).exp() * power * laguerre_poly(n, Complex64::new(-qg, 0.0), r2)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReferencePotential {
    ScarfII(ScarfII),
    GenOscillator(GenOscillator),
}

impl ReferencePotential {
    pub fn omega(&self, y: f64) -> Result<Complex64> {
        match self {
            ReferencePotential::ScarfII(s) => Ok(s.omega(y)),
            ReferencePotential::GenOscillator(o) => o.omega(y),
        }
    }

    pub fn energy(
        &self,
        sel: BranchSelection,
        n: usize,
        conv: SpectrumConvention,
        formula: ScarfFormula,
    ) -> Result<EnergyLevel> {
        match self {
            ReferencePotential::ScarfII(s) => s.energy(sel, n, conv, formula),
            ReferencePotential::GenOscillator(o) => Ok(o.energy(n, conv)),
        }
    }

    pub fn wavefunction(&self, sel: BranchSelection, n: usize, y: f64) -> Result<Complex64> {
        match self {
            ReferencePotential::ScarfII(s) => s.wavefunction(sel, n, y),
            ReferencePotential::GenOscillator(o) => o.wavefunction(n, y),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ReferencePotential::ScarfII(_) => "scarf",
            ReferencePotential::GenOscillator(_) => "oscillator",
        }
    }
}

impl Serialize for ReferencePotential {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ReferencePotential::ScarfII(p) => {
                let mut st = s.serialize_struct("ScarfII", 3)?;
                st.serialize_field("kind", "scarf")?;
                st.serialize_field("lambda", &Sci(p.lambda))?;
                st.serialize_field("mu", &Sci(p.mu))?;
                st.end()
            }
            ReferencePotential::GenOscillator(p) => {
                let mut st = s.serialize_struct("GenOscillator", 4)?;
                st.serialize_field("kind", "oscillator")?;
                st.serialize_field("g", &Sci(p.g))?;
                st.serialize_field("eps", &Sci(p.epsilon))?;
                st.serialize_field("qparity", &p.quasi_parity)?;
                st.end()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyLevel {
    pub n: usize,
    pub energy: Complex64,
    pub quasi_parity: Option<i8>,
    pub convention: SpectrumConvention,
}

/// Both quasi-parity towers `n = 0..=n_max`, sorted by energy.
pub fn oscillator_union(
    osc: &GenOscillator,
    n_max: usize,
    conv: SpectrumConvention,
) -> Vec<EnergyLevel> {
    let mut levels: Vec<EnergyLevel> = [Sign::Plus, Sign::Minus]
        .into_iter()
        .flat_map(|q| {
            let o = osc.with_parity(q);
            (0..=n_max).map(move |n| o.energy(n, conv))
        })
        .collect();
    levels.sort_by(|a, b| a.energy.re.total_cmp(&b.energy.re));
    levels
}
