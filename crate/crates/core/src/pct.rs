//! Point canonical transformation `Ψ(x) = m(x)^β φ(y(x))` between the
//! BenDaniel–Duke equation `-d/dx[(κ/m) dΨ/dx] + V Ψ = E Ψ` and a constant-mass
//! equation `-κ φ'' + Ω(y) φ = E φ`.
//!
//! With `y' = m^{γ/2}` the first-derivative term vanishes iff
//! `γ/2 + 2β - 1 = 0`, and then
//!
//! ```text
//! Ω(y) = -κ β m^{-γ} [(β-2)(m'/m)² + m''/m] + (V - E) m^{1-γ} + E
//! V(x) = m^{γ-1} (Ω(y(x)) - E) + E + κ β m^{-1} [(β-2)(m'/m)² + m''/m]
//! ```
//!
//! Case A is `γ = 0` (`β = 1/2`, `y = x`). `κ` is 1/2 or 1 depending on the
//! [`SpectrumConvention`].

use num_complex::Complex64;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::format::{pair, Sci};
use crate::mass::{pt_defect, GridSpec, MassDistribution, SampledFunction};
use crate::reference::{
    BranchSelection, EnergyLevel, ReferencePotential, ScarfFormula, SpectrumConvention,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Case {
    A,
    B,
}

impl Case {
    pub fn name(self) -> &'static str {
        match self {
            Case::A => "case-a",
            Case::B => "case-b",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PctScheme {
    case: Case,
    gamma: f64,
    beta: f64,
    mass: MassDistribution,
}

impl PctScheme {
    /// `β = 1/2` with the identity coordinate map.
    pub fn case_a(mass: MassDistribution) -> Self {
        Self {
            case: Case::A,
            gamma: 0.0,
            beta: 0.5,
            mass,
        }
    }

    /// `β = (2 - γ)/4` with `y = ∫ m^{γ/2}`.
    pub fn case_b(gamma: f64, mass: MassDistribution) -> Result<Self> {
        if !gamma.is_finite() || gamma == 0.0 {
            return Err(Error::InvalidParameter(format!(
                "Case B needs gamma != 0, got {gamma}"
            )));
        }
        Ok(Self {
            case: Case::B,
            gamma,
            beta: (2.0 - gamma) / 4.0,
            mass,
        })
    }

    /// Same scheme with `β` forced to another value. Breaks the
    /// first-derivative constraint; used for negative controls.
    pub fn with_beta(self, beta: f64) -> Self {
        Self { beta, ..self }
    }

    pub fn case(&self) -> Case {
        self.case
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn mass(&self) -> &MassDistribution {
        &self.mass
    }

    /// Coefficient of `φ'` after the transformation; zero for a valid scheme.
    pub fn constraint_defect(&self) -> f64 {
        self.gamma / 2.0 + 2.0 * self.beta - 1.0
    }

    pub fn y_of_x(&self, x: f64) -> f64 {
        self.mass.coordinate_y(self.gamma, x)
    }

    pub fn x_of_y(&self, y: f64) -> Result<f64> {
        self.mass.coordinate_x(self.gamma, y)
    }

    /// Uniform `y` grid covering the image of a symmetric `x` grid.
    pub fn y_grid(&self, x_grid: &GridSpec) -> Result<GridSpec> {
        let half = self.y_of_x(x_grid.upper());
        GridSpec::symmetric(half, x_grid.len())
    }

    // κ β [(β-2)(m'/m)² + m''/m]
    fn derivative_term(&self, x: f64, conv: SpectrumConvention) -> f64 {
        let (d1, d2) = self.mass.log_derivs(x);
        conv.kinetic_factor() * self.beta * ((self.beta - 2.0) * d1 * d1 + d2)
    }

    /// `Ω(y)` for a target potential `V` given as a function of `x`.
    pub fn forward_omega_at(
        &self,
        potential: &dyn Fn(f64) -> Result<Complex64>,
        energy: Complex64,
        conv: SpectrumConvention,
        y: f64,
    ) -> Result<Complex64> {
        let x = self.x_of_y(y)?;
        let m = self.mass.eval(x);
        let v = potential(x)?;
        let dt = self.derivative_term(x, conv);
        Ok(-dt * m.powf(-self.gamma) + (v - energy) * m.powf(1.0 - self.gamma) + energy)
    }

    /// `Ω` sampled on the uniform `y` grid (for Case A, `y_grid` is the `x` grid).
    /// `V` is evaluated at `x(y_j)` directly, so no interpolation is involved.
    pub fn forward_omega(
        &self,
        potential: &dyn Fn(f64) -> Result<Complex64>,
        energy: Complex64,
        conv: SpectrumConvention,
        y_grid: &GridSpec,
    ) -> Result<SampledFunction> {
        SampledFunction::from_fn(*y_grid, "omega", |y| {
            self.forward_omega_at(potential, energy, conv, y)
        })
    }

    /// Target potential `V(x)` that maps onto the reference profile `Ω(y)` at
    /// energy `E`. Exact algebraic inverse of [`forward_omega_at`](Self::forward_omega_at).
    pub fn inverse_potential(
        &self,
        omega: &dyn Fn(f64) -> Result<Complex64>,
        energy: Complex64,
        conv: SpectrumConvention,
        x: f64,
    ) -> Result<Complex64> {
        let m = self.mass.eval(x);
        let om = omega(self.y_of_x(x))?;
        let dt = self.derivative_term(x, conv);
        Ok(m.powf(self.gamma - 1.0) * (om - energy) + energy + dt / m)
    }

    /// `sup |forward(inverse(Ω)) - Ω|` on the `y` image of `x_grid`.
    pub fn round_trip_defect(
        &self,
        omega: &dyn Fn(f64) -> Result<Complex64>,
        energy: Complex64,
        conv: SpectrumConvention,
        x_grid: &GridSpec,
    ) -> Result<f64> {
        let v = |x: f64| self.inverse_potential(omega, energy, conv, x);
        let y_grid = self.y_grid(x_grid)?;
        let back = self.forward_omega(&v, energy, conv, &y_grid)?;
        let direct = SampledFunction::from_fn(y_grid, "omega", omega)?;
        Ok(back.max_abs_diff(&direct))
    }

    /// `Ψ(x) = m(x)^β φ(y(x))`.
    pub fn assemble_psi(
        &self,
        phi: &dyn Fn(f64) -> Result<Complex64>,
        x: f64,
    ) -> Result<Complex64> {
        Ok(self.mass.pow(x, self.beta) * phi(self.y_of_x(x))?)
    }
}

impl Serialize for PctScheme {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("PctScheme", 5)?;
        st.serialize_field("case", self.case.name())?;
        st.serialize_field("alpha", &Sci(self.mass.alpha))?;
        st.serialize_field("k", &Sci(self.mass.exponent_k))?;
        st.serialize_field("gamma", &Sci(self.gamma))?;
        st.serialize_field("beta", &Sci(self.beta))?;
        st.end()
    }
}

/// Jump `|(Ψ'/m)(x0+) - (Ψ'/m)(x0-)|` at the node nearest `x0`, from
/// second-order one-sided differences. Vanishes (to `O(h²)`) for smooth data.
pub fn matching_check(psi: &SampledFunction, mass: &SampledFunction, x0: f64) -> Result<f64> {
    if psi.grid() != mass.grid() {
        return Err(Error::InvalidParameter(
            "psi and mass sampled on different grids".into(),
        ));
    }
    let grid = psi.grid();
    let j = grid.nearest(x0);
    if j < 2 || j + 2 >= grid.len() {
        return Err(Error::InvalidParameter(format!(
            "x0 = {x0} is not interior to the grid"
        )));
    }
    let h = grid.spacing();
    let p = psi.values();
    let m = mass.values();
    let right = (-3.0 * p[j] + 4.0 * p[j + 1] - p[j + 2]) / (2.0 * h);
    let left = (3.0 * p[j] - 4.0 * p[j - 1] + p[j - 2]) / (2.0 * h);
    // one-sided limits of m, linearly extrapolated to the node
    let m_right = 2.0 * m[j + 1] - m[j + 2];
    let m_left = 2.0 * m[j - 1] - m[j - 2];
    Ok((right / m_right - left / m_left).norm())
}

/// A position-dependent-mass problem produced from one reference level.
///
/// `V` depends on the level energy, so every level carries its own potential.
#[derive(Debug, Clone)]
pub struct TargetProblem {
    pub scheme: PctScheme,
    pub reference: ReferencePotential,
    pub branch: BranchSelection,
    pub formula: ScarfFormula,
    pub level: EnergyLevel,
    pub convention: SpectrumConvention,
    pub potential: SampledFunction,
    pub psi: SampledFunction,
    pub pt_defect: f64,
}

impl TargetProblem {
    pub fn energy(&self) -> Complex64 {
        self.level.energy
    }

    pub fn grid(&self) -> &GridSpec {
        self.potential.grid()
    }

    /// `V(x)` evaluated off-grid from the closed forms.
    pub fn potential_at(&self, x: f64) -> Result<Complex64> {
        let reference = self.reference;
        self.scheme
            .inverse_potential(&|y| reference.omega(y), self.energy(), self.convention, x)
    }

    /// `Ψ_n(x)` evaluated off-grid from the closed forms.
    pub fn psi_at(&self, x: f64) -> Result<Complex64> {
        let (reference, branch, n) = (self.reference, self.branch, self.level.n);
        self.scheme
            .assemble_psi(&|y| reference.wavefunction(branch, n, y), x)
    }

    /// `Ψ_n` sampled on any grid.
    pub fn sample_psi(&self, grid: &GridSpec) -> Result<SampledFunction> {
        SampledFunction::from_fn(*grid, "psi", |x| self.psi_at(x))
    }

    /// `Ω(y(x))` on the target grid.
    pub fn omega_on_grid(&self) -> Result<SampledFunction> {
        let reference = self.reference;
        SampledFunction::from_fn(*self.grid(), "omega", |x| {
            reference.omega(self.scheme.y_of_x(x))
        })
    }
}

impl Serialize for TargetProblem {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("TargetProblem", 12)?;
        st.serialize_field("schema", crate::SCHEMA)?;
        st.serialize_field("version", crate::VERSION)?;
        st.serialize_field("scheme", &self.scheme)?;
        st.serialize_field("reference", &self.reference)?;
        st.serialize_field("branch", &self.branch)?;
        st.serialize_field("formula", &self.formula)?;
        st.serialize_field("n", &self.level.n)?;
        st.serialize_field("E", &pair(self.level.energy))?;
        st.serialize_field("convention", &self.convention)?;
        st.serialize_field("pt_defect", &Sci(self.pt_defect))?;
        st.serialize_field("potential", &self.potential)?;
        st.serialize_field("psi", &self.psi)?;
        st.end()
    }
}

/// Energy from the reference closed form, `V` from the inverse map, and
/// `Ψ_n = m^β φ_n(y(x))`, all sampled on `grid`.
pub fn build_target_problem(
    scheme: PctScheme,
    reference: ReferencePotential,
    branch: BranchSelection,
    n: usize,
    convention: SpectrumConvention,
    formula: ScarfFormula,
    grid: &GridSpec,
) -> Result<TargetProblem> {
    let level = reference.energy(branch, n, convention, formula)?;
    let potential = SampledFunction::from_fn(*grid, format!("V_target[n={n}]"), |x| {
        scheme.inverse_potential(&|y| reference.omega(y), level.energy, convention, x)
    })?;
    let psi = SampledFunction::from_fn(*grid, format!("psi[n={n}]"), |x| {
        scheme.assemble_psi(&|y| reference.wavefunction(branch, n, y), x)
    })?;
    let pt_defect = pt_defect(&potential)?;
    Ok(TargetProblem {
        scheme,
        reference,
        branch,
        formula,
        level,
        convention,
        potential,
        psi,
        pt_defect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference::{GenOscillator, ScarfII, Sign};

    fn scarf() -> ReferencePotential {
        ReferencePotential::ScarfII(ScarfII::new(3.0, 1.0).unwrap())
    }

    fn osc() -> ReferencePotential {
        ReferencePotential::GenOscillator(GenOscillator::new(1.0, 0.5, Sign::Plus).unwrap())
    }

    #[test]
    fn case_b_satisfies_constraint() {
        let m = MassDistribution::new(2.0, 2.0).unwrap();
        for gamma in [0.5, 1.0, 2.0, -1.0, 3.7] {
            let s = PctScheme::case_b(gamma, m).unwrap();
            assert!(s.constraint_defect().abs() < 1e-15);
        }
        assert!(PctScheme::case_a(m).constraint_defect().abs() < 1e-15);
        assert!(PctScheme::case_b(0.0, m).is_err());
        assert!(PctScheme::case_a(m).with_beta(0.6).constraint_defect() > 0.1);
    }

    #[test]
    fn constant_mass_is_identity() {
        let m = MassDistribution::new(1.0, 2.0).unwrap();
        let e = Complex64::new(-1.3, 0.2);
        for scheme in [PctScheme::case_a(m), PctScheme::case_b(1.0, m).unwrap()] {
            for x in [-3.0, 0.0, 0.4, 5.0] {
                for reference in [scarf(), osc()] {
                    let om = |y: f64| reference.omega(y);
                    let v = scheme
                        .inverse_potential(&om, e, SpectrumConvention::Unit, x)
                        .unwrap();
                    assert!((v - reference.omega(x).unwrap()).norm() < 1e-14);
                    let back = scheme
                        .forward_omega_at(&om, e, SpectrumConvention::Unit, x)
                        .unwrap();
                    assert!((back - reference.omega(x).unwrap()).norm() < 1e-14);
                }
                let phi = |y: f64| Ok(Complex64::new(y.cos(), y));
                assert_eq!(scheme.assemble_psi(&phi, x).unwrap(), phi(x).unwrap());
            }
        }
    }

    #[test]
    fn case_a_zero_potential_keeps_derivative_terms() {
        let m = MassDistribution::new(2.0, 2.0).unwrap();
        let scheme = PctScheme::case_a(m);
        let zero = |_: f64| Ok(Complex64::new(0.0, 0.0));
        for x in [-1.0, 0.3, 2.0] {
            let (d1, d2) = m.log_derivs(x);
            let expected = 0.375 * d1 * d1 - 0.25 * d2;
            let got = scheme
                .forward_omega_at(&zero, Complex64::new(0.0, 0.0), SpectrumConvention::Half, x)
                .unwrap();
            assert!((got - Complex64::new(expected, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn case_a_origin_substitution() {
        let m = MassDistribution::new(2.0, 2.0).unwrap();
        let scheme = PctScheme::case_a(m);
        let reference = scarf();
        let e = Complex64::new(-0.8, 0.0);
        let conv = SpectrumConvention::Half;
        let (_, d2) = m.log_derivs(0.0);
        let expected = 0.25 * (reference.omega(0.0).unwrap() + 0.25 * d2 + 3.0 * e);
        let v = scheme
            .inverse_potential(&|y| reference.omega(y), e, conv, 0.0)
            .unwrap();
        assert!((v - expected).norm() < 1e-14);
    }

    #[test]
    fn assemble_psi_examples() {
        let m = MassDistribution::new(2.0, 2.0).unwrap();
        let phi = |y: f64| Ok(Complex64::new(1.0 + y, -y));
        let a = PctScheme::case_a(m);
        assert!((a.assemble_psi(&phi, 0.0).unwrap() - 2.0 * phi(0.0).unwrap()).norm() < 1e-15);
        // γ = 2 means β = 0: a pure change of variable
        let b = PctScheme::case_b(2.0, MassDistribution::new(2.0, 1.0).unwrap()).unwrap();
        assert_eq!(b.beta(), 0.0);
        for x in [-2.0, 0.5, 3.0] {
            let expected = phi(b.y_of_x(x)).unwrap();
            assert!((b.assemble_psi(&phi, x).unwrap() - expected).norm() < 1e-15);
        }
    }

    #[test]
    fn round_trip_on_scarf_profile() {
        let grid = GridSpec::symmetric(8.0, 401).unwrap();
        for alpha in [0.5, 2.0, 5.0] {
            for gamma in [0.5, 1.0, 2.0] {
                let m = MassDistribution::new(alpha, 2.0 / gamma).unwrap();
                let scheme = PctScheme::case_b(gamma, m).unwrap();
                let reference = scarf();
                let e = Complex64::new(-0.7, 0.0);
                let conv = SpectrumConvention::Unit;
                let om = |y: f64| reference.omega(y);
                let defect = scheme.round_trip_defect(&om, e, conv, &grid).unwrap();
                assert!(defect < 1e-10, "α={alpha} γ={gamma}");
            }
        }
    }

    #[test]
    fn target_is_pt_symmetric() {
        let grid = GridSpec::symmetric(12.0, 601).unwrap();
        let m = MassDistribution::new(2.0, 2.0).unwrap();
        let t = build_target_problem(
            PctScheme::case_a(m),
            osc(),
            BranchSelection::default(),
            0,
            SpectrumConvention::Unit,
            ScarfFormula::Corrected,
            &grid,
        )
        .unwrap();
        assert!(t.pt_defect < 1e-10);
        let j = grid.nearest(1.3);
        assert!((t.potential_at(grid.point(j)).unwrap() - t.potential.values()[j]).norm() < 1e-12);
    }

    #[test]
    fn degenerate_target_matches_reference() {
        let grid = GridSpec::symmetric(10.0, 201).unwrap();
        let m = MassDistribution::new(1.0, 2.0).unwrap();
        let reference = osc();
        let t = build_target_problem(
            PctScheme::case_a(m),
            reference,
            BranchSelection::default(),
            1,
            SpectrumConvention::Unit,
            ScarfFormula::Corrected,
            &grid,
        )
        .unwrap();
        let omega = t.omega_on_grid().unwrap();
        assert!(t.potential.max_abs_diff(&omega) < 1e-13);
        let phi = SampledFunction::from_fn(grid, "phi", |y| {
            reference.wavefunction(BranchSelection::default(), 1, y)
        })
        .unwrap();
        assert!(t.psi.max_abs_diff(&phi) < 1e-15);
    }

    #[test]
    fn matching_smooth_and_kinked() {
        let grid = GridSpec::symmetric(5.0, 1001).unwrap();
        let h = grid.spacing();
        let mass = SampledFunction::from_real(grid, "m", |x| 1.0 + 0.3 * x * x).unwrap();
        let gauss = SampledFunction::from_real(grid, "g", |x| (-x * x).exp()).unwrap();
        assert!(matching_check(&gauss, &mass, 0.37).unwrap() < 10.0 * h * h);

        // |x - x0| kink: derivative jumps by 2 at x0 (x0 on a node)
        let x0 = grid.point(grid.nearest(0.37));
        let kink = SampledFunction::from_real(grid, "k", |x| (x - x0).abs()).unwrap();
        let jump = matching_check(&kink, &mass, x0).unwrap();
        let expected = 2.0 / (1.0 + 0.3 * x0 * x0);
        assert!((jump - expected).abs() < 10.0 * h, "{jump} vs {expected}");

        assert!(matching_check(&gauss, &mass, 5.0).is_err());
    }
}
