//! The isometric conformal map between (x, t) and (z, s), its conjugate and
//! inverses, the chain-rule derivative operators in both coordinate systems,
//! and the holomorphy / coordinate-independence checks.
//!
//! The map is z_i = x_i, s = t − i(mω/2E)x² with x² = Σx_i²; it is a pure
//! imaginary shift of time, so |z_i| = |x_i| exactly (z shares the storage
//! of x). Each energy value induces its own map instance.
//!
//! Two operator families are kept apart. The chain-rule forms contain ∂/∂t
//! and need the map energy:
//!
//!   ∂/∂s  = ∂/∂t,   ∂/∂z_i  = ∂/∂x_i + i(mωx_i/E) ∂/∂t
//!   ∂/∂s* = ∂/∂t,   ∂/∂z_i* = ∂/∂x_i − i(mωx_i/E) ∂/∂t
//!
//! Substituting iħ∂/∂t → E turns the spatial pair into multiplication
//! operators, ∂/∂z_i = ∂/∂x_i + (mω/ħ)x_i and ∂/∂z_i* = ∂/∂x_i − (mω/ħ)x_i,
//! which differ only in the sign of the x_i term. The substitution is a
//! separate, selectable form so the step itself stays testable.

use crate::error::{Error, Result};
use crate::numerics::{differentiate, StencilSpec};
use crate::params::{Energy, OscillatorParams, StateLabel};
use num_complex::Complex64;

/// Absolute tolerance on Im(t) when inverting; larger residues mean the
/// (z, s) input is not on the image of the forward map.
pub const OFF_MANIFOLD_TOL: f64 = 1e-12;

/// One event under the map: real coordinates plus their complex images.
#[derive(Debug, Clone, Copy)]
pub struct ConformalPoint {
    pub x: [f64; 3],
    pub t: f64,
    pub s: Complex64,
    pub energy: Energy,
    pub params: OscillatorParams,
}

impl ConformalPoint {
    pub fn from_real(
        x: [f64; 3],
        t: f64,
        energy: Energy,
        params: &OscillatorParams,
    ) -> Result<Self> {
        let (_, s) = forward_map(x, t, energy, params)?;
        Ok(Self { x, t, s, energy, params: *params })
    }

    /// Spatial image; the map is the identity on space, so this *is* x.
    pub fn z(&self) -> [f64; 3] {
        self.x
    }

    pub fn s_star(&self) -> Complex64 {
        self.s.conj()
    }
}

fn map_coefficient(energy: Energy, params: &OscillatorParams) -> Result<f64> {
    if energy.value == 0.0 {
        return Err(Error::ZeroEnergy);
    }
    Ok(params.mass * params.omega / (2.0 * energy.value))
}

/// z = x, s = t − i(mω/2E)x².
pub fn forward_map(
    x: [f64; 3],
    t: f64,
    energy: Energy,
    params: &OscillatorParams,
) -> Result<([f64; 3], Complex64)> {
    let c = map_coefficient(energy, params)?;
    let x2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    Ok((x, Complex64::new(t, -c * x2)))
}

/// z* = x, s* = t + i(mω/2E)x².
pub fn conjugate_map(
    x: [f64; 3],
    t: f64,
    energy: Energy,
    params: &OscillatorParams,
) -> Result<([f64; 3], Complex64)> {
    let (z, s) = forward_map(x, t, energy, params)?;
    Ok((z, s.conj()))
}

fn real_part_checked(t: Complex64) -> Result<f64> {
    if t.im.abs() > OFF_MANIFOLD_TOL {
        return Err(Error::OffManifold { imag: t.im, tol: OFF_MANIFOLD_TOL });
    }
    Ok(t.re)
}

/// x = z, t = s + i(mω/2E)z²; errors if the reconstructed t is not real.
pub fn inverse_map(
    z: [f64; 3],
    s: Complex64,
    energy: Energy,
    params: &OscillatorParams,
) -> Result<([f64; 3], f64)> {
    let c = map_coefficient(energy, params)?;
    let z2 = z[0] * z[0] + z[1] * z[1] + z[2] * z[2];
    let t = s + Complex64::new(0.0, c * z2);
    Ok((z, real_part_checked(t)?))
}

/// x = z*, t = s* − i(mω/2E)z².
pub fn inverse_conjugate_map(
    z_star: [f64; 3],
    s_star: Complex64,
    energy: Energy,
    params: &OscillatorParams,
) -> Result<([f64; 3], f64)> {
    let c = map_coefficient(energy, params)?;
    let z2 = z_star[0] * z_star[0] + z_star[1] * z_star[1] + z_star[2] * z_star[2];
    let t = s_star - Complex64::new(0.0, c * z2);
    Ok((z_star, real_part_checked(t)?))
}

/// A complex-valued field over real coordinates (x, t).
///
/// Analytic partials are optional; operators fall back to central
/// differences when they are absent. `in_domain` lets sampled fields
/// declare a finite window so stencils can refuse to step outside it.
pub trait ComplexField {
    fn value(&self, x: [f64; 3], t: f64) -> Complex64;

    fn partial_x(&self, _axis: usize, _x: [f64; 3], _t: f64) -> Option<Complex64> {
        None
    }

    fn partial_xx(&self, _axis: usize, _x: [f64; 3], _t: f64) -> Option<Complex64> {
        None
    }

    fn partial_t(&self, _x: [f64; 3], _t: f64) -> Option<Complex64> {
        None
    }

    fn in_domain(&self, _x: [f64; 3], _t: f64) -> bool {
        true
    }
}

impl<F: Fn([f64; 3], f64) -> Complex64> ComplexField for F {
    fn value(&self, x: [f64; 3], t: f64) -> Complex64 {
        self(x, t)
    }
}

/// Which derivative the operator realizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivKind {
    DDs,
    DDsStar,
    DDz,
    DDzStar,
    DDzeta,
    DDzetaStar,
}

/// Chain-rule form (keeps ∂/∂t, needs the map energy) versus the
/// energy-substituted multiplication form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OperatorForm {
    ChainRule { energy: Energy },
    EnergySubstituted,
}

#[derive(Debug, Clone, Copy)]
pub struct DerivativeOperator {
    pub kind: DerivKind,
    pub axis: usize,
    pub form: OperatorForm,
    pub stencil: StencilSpec,
}

impl DerivativeOperator {
    pub fn new(kind: DerivKind, axis: usize, form: OperatorForm) -> Self {
        Self { kind, axis, form, stencil: StencilSpec::default_first() }
    }

    pub fn with_stencil(mut self, stencil: StencilSpec) -> Self {
        self.stencil = stencil;
        self
    }
}

fn field_dx(
    f: &dyn ComplexField,
    axis: usize,
    x: [f64; 3],
    t: f64,
    stencil: &StencilSpec,
) -> Result<Complex64> {
    if let Some(d) = f.partial_x(axis, x, t) {
        return Ok(d);
    }
    let span = stencil.span();
    for sign in [-1.0, 1.0] {
        let mut probe = x;
        probe[axis] += sign * span;
        if !f.in_domain(probe, t) {
            return Err(Error::StencilOutOfDomain);
        }
    }
    Ok(differentiate(
        |v: f64| {
            let mut p = x;
            p[axis] = v;
            f.value(p, t)
        },
        x[axis],
        stencil,
    )
    .value)
}

fn field_dt(
    f: &dyn ComplexField,
    x: [f64; 3],
    t: f64,
    stencil: &StencilSpec,
) -> Result<Complex64> {
    if let Some(d) = f.partial_t(x, t) {
        return Ok(d);
    }
    let span = stencil.span();
    if !f.in_domain(x, t - span) || !f.in_domain(x, t + span) {
        return Err(Error::StencilOutOfDomain);
    }
    Ok(differentiate(|v: f64| f.value(x, v), t, stencil).value)
}

/// Apply one derivative operator to a field at a point.
pub fn apply_derivative(
    op: &DerivativeOperator,
    f: &dyn ComplexField,
    x: [f64; 3],
    t: f64,
    params: &OscillatorParams,
) -> Result<Complex64> {
    let axis = op.axis;
    let beta = params.beta();
    match op.kind {
        DerivKind::DDs | DerivKind::DDsStar => field_dt(f, x, t, &op.stencil),
        DerivKind::DDz | DerivKind::DDzStar | DerivKind::DDzeta | DerivKind::DDzetaStar => {
            let sign = match op.kind {
                DerivKind::DDz | DerivKind::DDzeta => 1.0,
                _ => -1.0,
            };
            let dx = field_dx(f, axis, x, t, &op.stencil)?;
            let base = match op.form {
                OperatorForm::ChainRule { energy } => {
                    if energy.value == 0.0 {
                        return Err(Error::ZeroEnergy);
                    }
                    let dt = field_dt(f, x, t, &op.stencil)?;
                    let coeff = params.mass * params.omega * x[axis] / energy.value;
                    dx + Complex64::new(0.0, sign * coeff) * dt
                }
                OperatorForm::EnergySubstituted => dx + sign * beta * x[axis] * f.value(x, t),
            };
            match op.kind {
                DerivKind::DDzeta | DerivKind::DDzetaStar => {
                    if beta == 0.0 {
                        return Err(Error::Domain(
                            "zeta derivative requires omega > 0".into(),
                        ));
                    }
                    Ok(base / beta.sqrt())
                }
                _ => Ok(base),
            }
        }
    }
}

/// Primitive steps an operator pipeline may perform. The energy-substituted
/// first-order operators multiply by a coordinate, never by the potential;
/// `MulPotential` exists only so the real-coordinate Hamiltonian can be
/// expressed in the same language and the two paths compared structurally.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Prim {
    /// ∂/∂x_i + (mω/ħ)x_i
    Dz(usize),
    /// ∂/∂x_i − (mω/ħ)x_i
    DzStar(usize),
    /// ∂²/∂x_i²
    Dxx(usize),
    /// multiply by ½mω²x²
    MulPotential,
}

#[derive(Debug, Clone)]
pub struct PipelineTerm {
    pub coeff: Complex64,
    /// Applied right-to-left: [A, B] means A(B(f)).
    pub prims: Vec<Prim>,
}

/// A linear operator written as a sum of primitive compositions, evaluated
/// by one shared interpreter so that structural claims about a pipeline
/// ("never touches the potential") hold for the actual evaluation path.
#[derive(Debug, Clone)]
pub struct OperatorPipeline {
    pub terms: Vec<PipelineTerm>,
}

impl OperatorPipeline {
    /// −(ħ²/2m)∇² + ½mω²x², the real-coordinate Hamiltonian.
    pub fn hamiltonian_real(params: &OscillatorParams) -> Self {
        let kin = -params.hbar * params.hbar / (2.0 * params.mass);
        let mut terms: Vec<PipelineTerm> = (0..3)
            .map(|i| PipelineTerm { coeff: Complex64::new(kin, 0.0), prims: vec![Prim::Dxx(i)] })
            .collect();
        terms.push(PipelineTerm {
            coeff: Complex64::new(1.0, 0.0),
            prims: vec![Prim::MulPotential],
        });
        Self { terms }
    }

    /// −(ħ²/2m) Σ_i ∂²/∂z_i*∂z_i + (3/2)ħω, the conformal-coordinate form.
    /// The potential never appears; it is traded for the constant term.
    pub fn hamiltonian_conformal(params: &OscillatorParams) -> Self {
        let kin = -params.hbar * params.hbar / (2.0 * params.mass);
        let mut terms: Vec<PipelineTerm> = (0..3)
            .map(|i| PipelineTerm {
                coeff: Complex64::new(kin, 0.0),
                prims: vec![Prim::DzStar(i), Prim::Dz(i)],
            })
            .collect();
        terms.push(PipelineTerm {
            coeff: Complex64::new(1.5 * params.hbar * params.omega, 0.0),
            prims: vec![],
        });
        Self { terms }
    }

    pub fn multiplies_by_potential(&self) -> bool {
        self.terms
            .iter()
            .any(|t| t.prims.iter().any(|p| *p == Prim::MulPotential))
    }

    pub fn apply(
        &self,
        f: &dyn ComplexField,
        x: [f64; 3],
        t: f64,
        params: &OscillatorParams,
        stencil: &StencilSpec,
    ) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for term in &self.terms {
            acc += term.coeff * chain_value(&term.prims, f, x, t, params, stencil)?;
        }
        Ok(acc)
    }
}

fn chain_value(
    prims: &[Prim],
    f: &dyn ComplexField,
    x: [f64; 3],
    t: f64,
    params: &OscillatorParams,
    stencil: &StencilSpec,
) -> Result<Complex64> {
    let Some((&first, rest)) = prims.split_first() else {
        return Ok(f.value(x, t));
    };
    let beta = params.beta();
    match first {
        Prim::Dz(i) => {
            Ok(chain_dx(rest, i, f, x, t, params, stencil)?
                + beta * x[i] * chain_value(rest, f, x, t, params, stencil)?)
        }
        Prim::DzStar(i) => {
            Ok(chain_dx(rest, i, f, x, t, params, stencil)?
                - beta * x[i] * chain_value(rest, f, x, t, params, stencil)?)
        }
        Prim::Dxx(i) => chain_dxx(rest, i, f, x, t, params, stencil),
        Prim::MulPotential => {
            Ok(params.potential(x) * chain_value(rest, f, x, t, params, stencil)?)
        }
    }
}

/// ∂/∂x_axis of a primitive chain. Uses analytic information where the base
/// field provides it (directly, or one product-rule step deep); otherwise
/// falls back to central differences on the chain value.
fn chain_dx(
    prims: &[Prim],
    axis: usize,
    f: &dyn ComplexField,
    x: [f64; 3],
    t: f64,
    params: &OscillatorParams,
    stencil: &StencilSpec,
) -> Result<Complex64> {
    let beta = params.beta();
    match prims {
        [] => field_dx(f, axis, x, t, stencil),
        [Prim::Dz(i)] | [Prim::DzStar(i)] if *i == axis => {
            let sign = if matches!(prims[0], Prim::Dz(_)) { 1.0 } else { -1.0 };
            if let (Some(fxx), Some(fx)) =
                (f.partial_xx(axis, x, t), f.partial_x(axis, x, t))
            {
                // d/dx_i [f_x ± βx_i f] = f_xx ± β(f + x_i f_x)
                return Ok(fxx + sign * beta * (f.value(x, t) + x[axis] * fx));
            }
            fd_on_chain(prims, axis, f, x, t, params, stencil)
        }
        _ => fd_on_chain(prims, axis, f, x, t, params, stencil),
    }
}

fn fd_on_chain(
    prims: &[Prim],
    axis: usize,
    f: &dyn ComplexField,
    x: [f64; 3],
    t: f64,
    params: &OscillatorParams,
    stencil: &StencilSpec,
) -> Result<Complex64> {
    let mut failure = None;
    let est = differentiate(
        |v: f64| {
            let mut p = x;
            p[axis] = v;
            match chain_value(prims, f, p, t, params, stencil) {
                Ok(c) => c,
                Err(e) => {
                    failure = Some(e);
                    Complex64::new(f64::NAN, f64::NAN)
                }
            }
        },
        x[axis],
        stencil,
    );
    match failure {
        Some(e) => Err(e),
        None => Ok(est.value),
    }
}

fn chain_dxx(
    prims: &[Prim],
    axis: usize,
    f: &dyn ComplexField,
    x: [f64; 3],
    t: f64,
    params: &OscillatorParams,
    stencil: &StencilSpec,
) -> Result<Complex64> {
    if prims.is_empty() {
        if let Some(d) = f.partial_xx(axis, x, t) {
            return Ok(d);
        }
    }
    let spec = StencilSpec { derivative_order: 2, ..*stencil };
    let mut failure = None;
    let est = differentiate(
        |v: f64| {
            let mut p = x;
            p[axis] = v;
            match chain_value(prims, f, p, t, params, &spec) {
                Ok(c) => c,
                Err(e) => {
                    failure = Some(e);
                    Complex64::new(f64::NAN, f64::NAN)
                }
            }
        },
        x[axis],
        &spec,
    );
    match failure {
        Some(e) => Err(e),
        None => Ok(est.value),
    }
}

/// Eigenfunction ψ as a field with analytic partials, for operator checks.
#[derive(Debug, Clone, Copy)]
pub struct EigenstateField {
    pub state: StateLabel,
    pub params: OscillatorParams,
    pub norm_mode: crate::eigenfunctions::NormMode,
}

impl EigenstateField {
    pub fn new(
        state: StateLabel,
        params: OscillatorParams,
        norm_mode: crate::eigenfunctions::NormMode,
    ) -> Self {
        Self { state, params, norm_mode }
    }

    pub fn energy(&self) -> Energy {
        crate::params::energy_of(self.state, &self.params)
    }

    fn phis(&self, x: [f64; 3]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (i, v) in out.iter_mut().enumerate() {
            *v = crate::eigenfunctions::phi(
                self.state.component(i) as usize,
                x[i],
                &self.params,
                self.norm_mode,
            )
            .expect("state within degree cap");
        }
        out
    }
}

impl ComplexField for EigenstateField {
    fn value(&self, x: [f64; 3], t: f64) -> Complex64 {
        crate::eigenfunctions::psi_real(self.state, x, t, &self.params, self.norm_mode)
            .expect("state within degree cap")
    }

    fn partial_x(&self, axis: usize, x: [f64; 3], t: f64) -> Option<Complex64> {
        let phis = self.phis(x);
        let dphi = crate::eigenfunctions::phi_dx(
            self.state.component(axis) as usize,
            x[axis],
            &self.params,
            self.norm_mode,
        )
        .ok()?;
        let others: f64 = (0..3).filter(|i| *i != axis).map(|i| phis[i]).product();
        let phase = crate::eigenfunctions::tau(
            Complex64::new(t, 0.0),
            self.energy(),
            &self.params,
        );
        Some(phase * dphi * others)
    }

    fn partial_xx(&self, axis: usize, x: [f64; 3], t: f64) -> Option<Complex64> {
        let phis = self.phis(x);
        let ddphi = crate::eigenfunctions::phi_dxx(
            self.state.component(axis) as usize,
            x[axis],
            &self.params,
            self.norm_mode,
        )
        .ok()?;
        let others: f64 = (0..3).filter(|i| *i != axis).map(|i| phis[i]).product();
        let phase = crate::eigenfunctions::tau(
            Complex64::new(t, 0.0),
            self.energy(),
            &self.params,
        );
        Some(phase * ddphi * others)
    }

    fn partial_t(&self, x: [f64; 3], t: f64) -> Option<Complex64> {
        Some(Complex64::new(0.0, -self.energy().value / self.params.hbar) * self.value(x, t))
    }
}

/// Random smooth probe: a trivariate polynomial under a Gaussian envelope,
/// with the stationary time phase e^{-iEt/ħ}. Carries no analytic partials,
/// so every derivative taken of it exercises the finite-difference path.
#[derive(Debug, Clone)]
pub struct GaussianDampedPoly {
    /// coeffs[i][k] multiplies ξ_i^k.
    pub coeffs: [[f64; 3]; 3],
    pub energy: Energy,
    pub params: OscillatorParams,
}

impl ComplexField for GaussianDampedPoly {
    fn value(&self, x: [f64; 3], t: f64) -> Complex64 {
        let mut u = 1.0;
        for i in 0..3 {
            let xi = crate::params::xi_coordinate(x[i], &self.params);
            let p = self.coeffs[i][0] + self.coeffs[i][1] * xi + self.coeffs[i][2] * xi * xi;
            u *= p * (-0.5 * xi * xi).exp();
        }
        let phase =
            Complex64::new(0.0, -self.energy.value * t / self.params.hbar).exp();
        phase * u
    }
}

/// Outcome of the coordinate-independence evaluation: the largest observed
/// magnitude of the four cross-derivatives over the sample points.
#[derive(Debug, Clone)]
pub struct CrossDerivativeReport {
    pub max_dz_ds: f64,
    pub max_ds_dz: f64,
    pub max_dzstar_dsstar: f64,
    pub max_dsstar_dzstar: f64,
}

impl CrossDerivativeReport {
    pub fn max_abs(&self) -> f64 {
        self.max_dz_ds
            .max(self.max_ds_dz)
            .max(self.max_dzstar_dsstar)
            .max(self.max_dsstar_dzstar)
    }
}

/// Evaluate ∂z/∂s, ∂s/∂z, ∂z*/∂s*, ∂s*/∂z* numerically by composing the
/// chain-rule operators on the coordinate functions written in (x, t).
/// All four must vanish: (z, s) are independent coordinates.
pub fn coordinate_independence_check(
    params: &OscillatorParams,
    energy: Energy,
    points: &[([f64; 3], f64)],
) -> Result<CrossDerivativeReport> {
    let c = map_coefficient(energy, params)?;
    let s_field = move |x: [f64; 3], t: f64| {
        let x2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        Complex64::new(t, -c * x2)
    };
    let s_star_field = move |x: [f64; 3], t: f64| s_field(x, t).conj();

    let mut report = CrossDerivativeReport {
        max_dz_ds: 0.0,
        max_ds_dz: 0.0,
        max_dzstar_dsstar: 0.0,
        max_dsstar_dzstar: 0.0,
    };

    for &(x, t) in points {
        for axis in 0..3 {
            let z_field = move |x: [f64; 3], _t: f64| Complex64::new(x[axis], 0.0);

            let dz_ds = apply_derivative(
                &DerivativeOperator::new(DerivKind::DDs, 0, OperatorForm::ChainRule { energy }),
                &z_field,
                x,
                t,
                params,
            )?;
            let ds_dz = apply_derivative(
                &DerivativeOperator::new(DerivKind::DDz, axis, OperatorForm::ChainRule { energy }),
                &s_field,
                x,
                t,
                params,
            )?;
            let dzs_dss = apply_derivative(
                &DerivativeOperator::new(
                    DerivKind::DDsStar,
                    0,
                    OperatorForm::ChainRule { energy },
                ),
                &z_field,
                x,
                t,
                params,
            )?;
            let dss_dzs = apply_derivative(
                &DerivativeOperator::new(
                    DerivKind::DDzStar,
                    axis,
                    OperatorForm::ChainRule { energy },
                ),
                &s_star_field,
                x,
                t,
                params,
            )?;

            report.max_dz_ds = report.max_dz_ds.max(dz_ds.norm());
            report.max_ds_dz = report.max_ds_dz.max(ds_dz.norm());
            report.max_dzstar_dsstar = report.max_dzstar_dsstar.max(dzs_dss.norm());
            report.max_dsstar_dzstar = report.max_dsstar_dzstar.max(dss_dzs.norm());
        }
    }
    Ok(report)
}

/// Rectangle in (t, u) with u = x² ≥ 0 on which τ is probed.
#[derive(Debug, Clone, Copy)]
pub struct CrGridSpec {
    pub t_range: (f64, f64),
    pub u_range: (f64, f64),
    pub t_points: usize,
    pub u_points: usize,
}

impl Default for CrGridSpec {
    fn default() -> Self {
        Self { t_range: (-1.0, 1.0), u_range: (0.0, 2.0), t_points: 11, u_points: 11 }
    }
}

/// Residuals of the Cauchy-Riemann system for τ(s), s = t + iy,
/// y = −(mω/2E)u, evaluated on a (t, u) grid.
///
/// `standard` is g_t − h_y and g_y + h_t (the orientation under which
/// τ(s) = e^{-iEs/ħ} is holomorphic); `alternate` is the opposite pairing
/// g_y − h_t, h_y + g_t, which that same τ violates — both are reported so
/// the sign convention stays visible instead of silently chosen.
/// `laplace` is the equivalent second-order form τ_tt + (4E²/m²ω²)τ_uu,
/// reading the u-derivative as ∂²/∂u² with u = x².
#[derive(Debug, Clone)]
pub struct CrReport {
    pub max_standard: f64,
    pub max_alternate: f64,
    pub max_laplace: f64,
    /// log₂ residual ratio under step halving; NaN when the residual sits
    /// at the rounding floor and no order is measurable.
    pub convergence_order: f64,
}

pub fn cr_residual(
    tau: &dyn Fn(Complex64) -> Complex64,
    energy: Energy,
    params: &OscillatorParams,
    grid: &CrGridSpec,
    stencil: &StencilSpec,
) -> Result<CrReport> {
    if energy.value == 0.0 {
        return Err(Error::ZeroEnergy);
    }
    // dy/du; ω = 0 collapses the strip to the real axis, still fine.
    let slope = -params.mass * params.omega / (2.0 * energy.value);

    let residuals = |h: f64| -> Result<(f64, f64, f64)> {
        let span_t = h;
        let span_u = h;
        let (t0, t1) = grid.t_range;
        let (u0, u1) = grid.u_range;
        if t1 - t0 <= 2.0 * span_t || u1 - u0 <= 2.0 * span_u {
            return Err(Error::StencilOutOfDomain);
        }
        let mut max_std: f64 = 0.0;
        let mut max_alt: f64 = 0.0;
        let mut max_lap: f64 = 0.0;
        for it in 0..grid.t_points {
            for iu in 0..grid.u_points {
                // keep the whole stencil inside the rectangle
                let ft = it as f64 / (grid.t_points - 1).max(1) as f64;
                let fu = iu as f64 / (grid.u_points - 1).max(1) as f64;
                let t = t0 + span_t + ft * (t1 - t0 - 2.0 * span_t);
                let u = u0 + span_u + fu * (u1 - u0 - 2.0 * span_u);
                let y = slope * u;

                let tau_ty = |tt: f64, yy: f64| tau(Complex64::new(tt, yy));
                let d_t = (tau_ty(t + h, y) - tau_ty(t - h, y)) / (2.0 * h);
                let d_y = (tau_ty(t, y + h) - tau_ty(t, y - h)) / (2.0 * h);

                let (g_t, h_t) = (d_t.re, d_t.im);
                let (g_y, h_y) = (d_y.re, d_y.im);

                max_std = max_std.max((g_t - h_y).abs()).max((g_y + h_t).abs());
                max_alt = max_alt.max((g_y - h_t).abs()).max((h_y + g_t).abs());

                // second-order form through the u variable as printed
                let tau_u = |uu: f64| tau(Complex64::new(t, slope * uu));
                let d_tt = (tau_ty(t + h, y) - 2.0 * tau_ty(t, y) + tau_ty(t - h, y)) / (h * h);
                let d_uu = (tau_u(u + h) - 2.0 * tau_u(u) + tau_u(u - h)) / (h * h);
                let factor = if params.omega == 0.0 {
                    0.0
                } else {
                    4.0 * energy.value * energy.value
                        / (params.mass * params.mass * params.omega * params.omega)
                };
                max_lap = max_lap.max((d_tt + factor * d_uu).norm());
            }
        }
        Ok((max_std, max_alt, max_lap))
    };

    let h = stencil.step;
    let (std_h, alt_h, lap_h) = residuals(h)?;
    let (std_h2, _, _) = residuals(h / 2.0)?;

    let convergence_order = if std_h < 1e-13 || std_h2 < 1e-14 {
        f64::NAN
    } else {
        (std_h / std_h2).log2()
    };

    Ok(CrReport {
        max_standard: std_h,
        max_alternate: alt_h,
        max_laplace: lap_h,
        convergence_order,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigenfunctions::NormMode;
    use crate::params::energy_of;
    use rand::Rng;
    use rand::SeedableRng;

    fn e(value: f64) -> Energy {
        Energy::from_value(value)
    }

    #[test]
    fn forward_map_examples() {
        let p = OscillatorParams::natural();
        let (z, s) = forward_map([0.0; 3], 5.0, e(1.5), &p).unwrap();
        assert_eq!(z, [0.0; 3]);
        assert_eq!(s, Complex64::new(5.0, 0.0));

        // mω/2E = 1/3 by hand
        let (_, s) = forward_map([1.0, 0.0, 0.0], 0.0, e(1.5), &p).unwrap();
        assert!((s - Complex64::new(0.0, -1.0 / 3.0)).norm() < 1e-15);

        let free = OscillatorParams::natural_with_omega(0.0).unwrap();
        let (z, s) = forward_map([3.0, -2.0, 0.5], 1.25, e(1.0), &free).unwrap();
        assert_eq!(z, [3.0, -2.0, 0.5]);
        assert_eq!(s, Complex64::new(1.25, 0.0));
    }

    #[test]
    fn conjugate_map_examples() {
        let p = OscillatorParams::natural();
        let (_, s) = forward_map([0.4, 1.7, -0.2], 0.9, e(2.5), &p).unwrap();
        let (_, s_star) = conjugate_map([0.4, 1.7, -0.2], 0.9, e(2.5), &p).unwrap();
        assert_eq!(s_star, s.conj());

        // x² = 3, mω/2E = 1/3 by hand
        let (_, s_star) = conjugate_map([1.0, 1.0, 1.0], 1.0, e(1.5), &p).unwrap();
        assert!((s_star - Complex64::new(1.0, 1.0)).norm() < 1e-15);

        let (_, s_star) = conjugate_map([0.0; 3], 0.7, e(1.5), &p).unwrap();
        assert_eq!(s_star, Complex64::new(0.7, 0.0));
    }

    #[test]
    fn zero_energy_rejected() {
        let p = OscillatorParams::natural();
        assert!(matches!(
            forward_map([1.0, 0.0, 0.0], 0.0, e(0.0), &p),
            Err(Error::ZeroEnergy)
        ));
    }

    #[test]
    fn inverse_examples_and_off_manifold() {
        let p = OscillatorParams::natural();
        let (x, t) =
            inverse_map([1.0, 0.0, 0.0], Complex64::new(0.0, -1.0 / 3.0), e(1.5), &p).unwrap();
        assert_eq!(x, [1.0, 0.0, 0.0]);
        assert_eq!(t, 0.0);

        // Im(t) = 1 + 1/3: inconsistent input
        let err = inverse_map([1.0, 0.0, 0.0], Complex64::new(1.0, 1.0), e(1.5), &p);
        assert!(matches!(err, Err(Error::OffManifold { .. })));
    }

    #[test]
    fn round_trip_identity() {
        let p = OscillatorParams::new(1.0, 1.4, 2.3).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let x = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
            let t = rng.gen_range(-5.0..5.0);
            let energy = e(rng.gen_range(0.3..9.0));

            let (z, s) = forward_map(x, t, energy, &p).unwrap();
            // isometry: the spatial image is the same storage
            assert_eq!(z, x);
            let (x2, t2) = inverse_map(z, s, energy, &p).unwrap();
            assert_eq!(x2, x);
            assert_eq!(t2, t);

            let (zs, ss) = conjugate_map(x, t, energy, &p).unwrap();
            let (x3, t3) = inverse_conjugate_map(zs, ss, energy, &p).unwrap();
            assert_eq!(x3, x);
            assert_eq!(t3, t);
        }
    }

    #[test]
    fn imaginary_shift_linear_in_omega() {
        let x = [1.0, 2.0, -1.0];
        let energy = e(2.0);
        let base = OscillatorParams::new(1.0, 1.0, 1e-3).unwrap();
        let (_, s1) = forward_map(x, 0.0, energy, &base).unwrap();
        let half = OscillatorParams::new(1.0, 1.0, 5e-4).unwrap();
        let (_, s2) = forward_map(x, 0.0, energy, &half).unwrap();
        assert!((s1.im / s2.im - 2.0).abs() < 1e-12);
        assert!(s1.im.abs() < 1e-2);
    }

    #[test]
    fn conformal_point_shares_spatial_storage() {
        let p = OscillatorParams::natural();
        let pt = ConformalPoint::from_real([0.3, -0.4, 0.5], 1.0, e(1.5), &p).unwrap();
        assert_eq!(pt.z(), pt.x);
        assert_eq!(pt.s_star(), pt.s.conj());
        assert_eq!(pt.s.re, pt.t);
    }

    #[test]
    fn cross_derivatives_vanish() {
        let p = OscillatorParams::natural();
        let energy = e(1.5);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut points = vec![([1.0, 1.0, 1.0], 0.0)];
        for _ in 0..100 {
            points.push((
                [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)],
                rng.gen_range(-2.0..2.0),
            ));
        }
        let report = coordinate_independence_check(&p, energy, &points).unwrap();
        assert!(report.max_abs() < 1e-10, "max {}", report.max_abs());
    }

    #[test]
    fn ds_on_eigenstate_gives_energy_phase_rate() {
        // applying ∂/∂s (= ∂/∂t) to ψ returns −iE/ħ·ψ
        let p = OscillatorParams::natural();
        let field = EigenstateField::new(StateLabel::new(1, 0, 2), p, NormMode::UnitNorm);
        let energy = field.energy();
        let op = DerivativeOperator::new(DerivKind::DDs, 0, OperatorForm::ChainRule { energy });
        let x = [0.3, 0.8, -0.4];
        let t = 0.9;
        let got = apply_derivative(&op, &field, x, t, &p).unwrap();
        let expect = Complex64::new(0.0, -energy.value / p.hbar) * field.value(x, t);
        assert!((got - expect).norm() < 1e-12 * expect.norm());
    }

    #[test]
    fn dz_star_even_function_at_origin() {
        // x term vanishes at x = 0 and φ_0 is even, so ∂/∂z* ψ = 0 there.
        let p = OscillatorParams::natural();
        let field = EigenstateField::new(StateLabel::ground(), p, NormMode::UnitNorm);
        let op = DerivativeOperator::new(DerivKind::DDzStar, 0, OperatorForm::EnergySubstituted);
        let got = apply_derivative(&op, &field, [0.0; 3], 0.0, &p).unwrap();
        assert!(got.norm() < 1e-12);
    }

    #[test]
    fn substituted_form_matches_chain_rule_on_eigenstates() {
        // On a field with iħ∂_t f = E f the two forms are the same operator.
        let p = OscillatorParams::natural();
        let field = EigenstateField::new(StateLabel::new(2, 1, 0), p, NormMode::UnitNorm);
        let energy = field.energy();
        let x = [0.7, -0.6, 0.2];
        let t = 0.31;
        for axis in 0..3 {
            let chain = apply_derivative(
                &DerivativeOperator::new(DerivKind::DDz, axis, OperatorForm::ChainRule { energy }),
                &field,
                x,
                t,
                &p,
            )
            .unwrap();
            let subst = apply_derivative(
                &DerivativeOperator::new(DerivKind::DDz, axis, OperatorForm::EnergySubstituted),
                &field,
                x,
                t,
                &p,
            )
            .unwrap();
            assert!((chain - subst).norm() < 1e-10 * subst.norm().max(1e-3));
        }
    }

    #[test]
    fn stencil_out_of_domain_reported() {
        struct Windowed;
        impl ComplexField for Windowed {
            fn value(&self, x: [f64; 3], _t: f64) -> Complex64 {
                Complex64::new(x[0], 0.0)
            }
            fn in_domain(&self, x: [f64; 3], _t: f64) -> bool {
                x[0].abs() <= 1.0
            }
        }
        let p = OscillatorParams::natural();
        let op = DerivativeOperator::new(DerivKind::DDzStar, 0, OperatorForm::EnergySubstituted);
        let inside = apply_derivative(&op, &Windowed, [0.5, 0.0, 0.0], 0.0, &p);
        assert!(inside.is_ok());
        let outside = apply_derivative(&op, &Windowed, [0.9999, 0.0, 0.0], 0.0, &p);
        assert!(matches!(outside, Err(Error::StencilOutOfDomain)));
    }

    #[test]
    fn hamiltonian_pipelines_structure() {
        let p = OscillatorParams::natural();
        assert!(OperatorPipeline::hamiltonian_real(&p).multiplies_by_potential());
        assert!(!OperatorPipeline::hamiltonian_conformal(&p).multiplies_by_potential());
    }

    #[test]
    fn operator_identity_on_random_smooth_fields() {
        // the two Hamiltonian pipelines agree on arbitrary smooth probes
        let p = OscillatorParams::natural();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let stencil = StencilSpec::new(1e-2, 1, 1);
        for trial in 0..5 {
            let mut coeffs = [[0.0; 3]; 3];
            for row in coeffs.iter_mut() {
                for c in row.iter_mut() {
                    *c = rng.gen_range(-1.0..1.0);
                }
            }
            coeffs[0][0] += 1.5; // keep the field away from identically-small values
            let field = GaussianDampedPoly {
                coeffs,
                energy: e(1.5),
                params: p,
            };
            let real = OperatorPipeline::hamiltonian_real(&p);
            let conf = OperatorPipeline::hamiltonian_conformal(&p);
            let mut max_rel: f64 = 0.0;
            for _ in 0..6 {
                let x = [
                    rng.gen_range(-1.2..1.2),
                    rng.gen_range(-1.2..1.2),
                    rng.gen_range(-1.2..1.2),
                ];
                let t = rng.gen_range(-0.5..0.5);
                let a = real.apply(&field, x, t, &p, &stencil).unwrap();
                let b = conf.apply(&field, x, t, &p, &stencil).unwrap();
                let scale = a.norm().max(field.value(x, t).norm()).max(1e-3);
                max_rel = max_rel.max((a - b).norm() / scale);
            }
            assert!(max_rel < 1e-6, "trial {trial}: relative deviation {max_rel}");
        }
    }

    #[test]
    fn concise_schrodinger_form_on_eigenstates() {
        // conformal pipeline applied to ψ returns Eψ without ever touching x²
        let p = OscillatorParams::natural();
        let stencil = StencilSpec::new(1e-3, 1, 1);
        let conf = OperatorPipeline::hamiltonian_conformal(&p);
        assert!(!conf.multiplies_by_potential());
        for state in StateLabel::all_up_to(4) {
            let field = EigenstateField::new(state, p, NormMode::UnitNorm);
            let energy = energy_of(state, &p);
            let x = [0.5, -0.9, 0.3];
            let t = 0.2;
            let lhs = conf.apply(&field, x, t, &p, &stencil).unwrap();
            let rhs = field.value(x, t) * energy.value;
            assert!(
                (lhs - rhs).norm() <= 1e-6 * rhs.norm().max(1e-6),
                "state {state}: {lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn cr_residual_holomorphic_exponential() {
        let p = OscillatorParams::natural();
        let energy = e(1.5);
        let tau = move |s: Complex64| (Complex64::new(0.0, -energy.value) * s).exp();
        let report = cr_residual(
            &tau,
            energy,
            &p,
            &CrGridSpec::default(),
            &StencilSpec::new(1e-3, 0, 1),
        )
        .unwrap();
        assert!(report.max_standard < 1e-5, "standard {}", report.max_standard);
        assert!(report.max_laplace < 1e-4, "laplace {}", report.max_laplace);
        assert!(
            (report.convergence_order - 2.0).abs() < 0.3,
            "order {}",
            report.convergence_order
        );
        // the opposite sign pairing rejects this same function
        assert!(report.max_alternate > 1.0, "alternate {}", report.max_alternate);
    }

    #[test]
    fn cr_residual_linear_exact() {
        // central differences are exact on a linear function up to rounding
        let p = OscillatorParams::natural();
        let report = cr_residual(
            &|s| s,
            e(1.5),
            &p,
            &CrGridSpec::default(),
            &StencilSpec::new(1e-3, 0, 1),
        )
        .unwrap();
        assert!(report.max_standard < 1e-12, "standard {}", report.max_standard);
        assert!(report.max_laplace < 1e-9, "laplace {}", report.max_laplace);
        assert!(report.convergence_order.is_nan());
    }

    #[test]
    fn cr_residual_antiholomorphic_counterexample() {
        // τ = conj(s): g_t = 1, h_y = −1, so the standard residual is 2.
        let p = OscillatorParams::natural();
        let report = cr_residual(
            &|s: Complex64| s.conj(),
            e(1.5),
            &p,
            &CrGridSpec::default(),
            &StencilSpec::new(1e-3, 0, 1),
        )
        .unwrap();
        assert!(report.max_standard >= 1.0, "standard {}", report.max_standard);
        assert!((report.max_standard - 2.0).abs() < 1e-9);
    }

    #[test]
    fn cr_grid_too_small_for_stencil() {
        let p = OscillatorParams::natural();
        let grid = CrGridSpec { t_range: (0.0, 1e-4), ..CrGridSpec::default() };
        let got = cr_residual(&|s| s, e(1.5), &p, &grid, &StencilSpec::new(1e-3, 0, 1));
        assert!(matches!(got, Err(Error::StencilOutOfDomain)));
    }
}
