//! Canonical charts and numeric Poisson brackets.
//!
//! A [`Chart`] fixes an ordered list of position names, the conjugate
//! momentum names, and a set of named constants (masses, charges, field
//! strengths). A [`PhasePoint`] is a finite coordinate vector in a chart,
//! ordered positions-then-momenta.
//!
//! In any such chart the bracket is the canonical one,
//! `{f, g} = Σ_i ∂f/∂q_i ∂g/∂p_i − ∂f/∂p_i ∂g/∂q_i`,
//! and Hamilton's equations read `dq_i/dt = ∂H/∂p_i`, `dp_i/dt = −∂H/∂q_i`.
//! All partial derivatives come from forward-mode duals, so the only error in
//! a bracket value is floating-point roundoff.
//!
//! The evaluation core is generic over the scalar type: seeding a bracket
//! with dual coordinates differentiates the bracket itself, which is how
//! [`jacobi_residual`] evaluates the cyclic sum `{f,{g,h}} + {g,{h,f}} +
//! {h,{f,g}}` without any symbolic rewriting.

use std::sync::Arc;

use crate::expr::dual::{Dual, Real};
use crate::expr::{Binding, EvalError, Expression};

/// Chart construction failure.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ChartError {
    #[error("a chart needs at least one coordinate pair")]
    Empty,
    #[error("chart has {nq} position names but {np} momentum names")]
    MismatchedLengths { nq: usize, np: usize },
    #[error("duplicate coordinate name `{0}`")]
    DuplicateName(String),
    #[error("constant `{0}` shadows a coordinate name")]
    ConstantShadowsCoordinate(String),
}

/// Failure while evaluating chart-bound quantities.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PoissonError {
    #[error(
        "symbol `{symbol}` is neither a coordinate nor a constant of chart `{chart}`"
    )]
    UnboundSymbol { chart: String, symbol: String },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("expected {expected} components for chart `{chart}`, got {got}")]
    DimensionMismatch {
        chart: String,
        expected: usize,
        got: usize,
    },
    #[error("component `{name}` is not finite")]
    NonFinite { name: String },
    #[error("coordinate `{name}` is missing from the assignment")]
    MissingCoordinate { name: String },
}

/// A named canonical chart: ordered positions, conjugate momenta, constants.
#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    name: String,
    q_names: Vec<String>,
    p_names: Vec<String>,
    constants: Binding,
}

impl Chart {
    /// Validate and build a chart. Position and momentum lists must be the
    /// same nonzero length, all names distinct, and no constant may reuse a
    /// coordinate name.
    pub fn new(
        name: &str,
        q_names: Vec<String>,
        p_names: Vec<String>,
        constants: Binding,
    ) -> Result<Arc<Chart>, ChartError> {
        if q_names.is_empty() {
            return Err(ChartError::Empty);
        }
        if q_names.len() != p_names.len() {
            return Err(ChartError::MismatchedLengths {
                nq: q_names.len(),
                np: p_names.len(),
            });
        }
        let mut seen = std::collections::BTreeSet::new();
        for n in q_names.iter().chain(p_names.iter()) {
            if !seen.insert(n.clone()) {
                return Err(ChartError::DuplicateName(n.clone()));
            }
        }
        for (n, _) in constants.iter() {
            if seen.contains(n) {
                return Err(ChartError::ConstantShadowsCoordinate(n.to_string()));
            }
        }
        Ok(Arc::new(Chart {
            name: name.to_string(),
            q_names,
            p_names,
            constants,
        }))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Degrees of freedom (number of coordinate pairs).
    pub fn dof(&self) -> usize {
        self.q_names.len()
    }

    /// Phase-space dimension, `2 * dof()`.
    pub fn dim(&self) -> usize {
        2 * self.q_names.len()
    }

    pub fn q_names(&self) -> &[String] {
        &self.q_names
    }

    pub fn p_names(&self) -> &[String] {
        &self.p_names
    }

    pub fn constants(&self) -> &Binding {
        &self.constants
    }

    /// Name of coordinate `i` in phase ordering (positions then momenta).
    pub fn coord_name(&self, i: usize) -> &str {
        let n = self.dof();
        if i < n {
            &self.q_names[i]
        } else {
            &self.p_names[i - n]
        }
    }

    /// Phase index of a coordinate name (positions first, then momenta).
    pub fn coord_index(&self, name: &str) -> Option<usize> {
        if let Some(i) = self.q_names.iter().position(|n| n == name) {
            return Some(i);
        }
        self.p_names
            .iter()
            .position(|n| n == name)
            .map(|i| i + self.dof())
    }

    /// Index within the momentum block if `name` is a momentum coordinate.
    pub fn momentum_index(&self, name: &str) -> Option<usize> {
        self.p_names.iter().position(|n| n == name)
    }

    /// All coordinate names in phase order.
    pub fn coord_names(&self) -> impl Iterator<Item = &str> {
        self.q_names
            .iter()
            .chain(self.p_names.iter())
            .map(|s| s.as_str())
    }
}

/// A point of phase space: chart plus finite coordinate values in phase order.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    chart: Arc<Chart>,
    values: Vec<f64>,
}

impl PhasePoint {
    pub fn new(chart: Arc<Chart>, values: Vec<f64>) -> Result<PhasePoint, PoissonError> {
        if values.len() != chart.dim() {
            return Err(PoissonError::DimensionMismatch {
                chart: chart.name().to_string(),
                expected: chart.dim(),
                got: values.len(),
            });
        }
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(PoissonError::NonFinite {
                    name: chart.coord_name(i).to_string(),
                });
            }
        }
        Ok(PhasePoint { chart, values })
    }

    /// Build a point from named coordinate values; every coordinate of the
    /// chart must be present.
    pub fn from_binding(chart: Arc<Chart>, values: &Binding) -> Result<PhasePoint, PoissonError> {
        let ordered = chart
            .coord_names()
            .map(|n| {
                values
                    .get(n)
                    .ok_or_else(|| PoissonError::MissingCoordinate { name: n.to_string() })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        PhasePoint::new(chart.clone(), ordered)
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn coords(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.chart.coord_index(name).map(|i| self.values[i])
    }
}

/// A tangent vector at a phase point, components in phase order.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    chart: Arc<Chart>,
    components: Vec<f64>,
}

impl TangentVector {
    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }
}

/// Where each free symbol of an expression gets its value in a chart.
#[derive(Debug, Clone, Copy)]
enum Source {
    Coord(usize),
    Constant(f64),
}

/// An expression resolved against a chart: every free symbol is either a
/// phase coordinate or a chart constant. Construction is cheap; evaluation
/// and differentiation then run with no name lookups.
#[derive(Debug, Clone)]
pub(crate) struct ChartBound<'e> {
    expr: &'e Expression,
    /// Per symbol slot: where its value comes from.
    sources: Vec<Source>,
    /// Per phase coordinate: which slot refers to it, if any.
    coord_slot: Vec<Option<usize>>,
    dim: usize,
}

impl<'e> ChartBound<'e> {
    pub fn new(expr: &'e Expression, chart: &Chart) -> Result<Self, PoissonError> {
        let dim = chart.dim();
        let mut sources = Vec::with_capacity(expr.free_symbols().len());
        let mut coord_slot = vec![None; dim];
        for (slot, name) in expr.free_symbols().iter().enumerate() {
            if let Some(i) = chart.coord_index(name) {
                sources.push(Source::Coord(i));
                coord_slot[i] = Some(slot);
            } else if let Some(v) = chart.constants().get(name) {
                sources.push(Source::Constant(v));
            } else {
                return Err(PoissonError::UnboundSymbol {
                    chart: chart.name().to_string(),
                    symbol: name.clone(),
                });
            }
        }
        Ok(ChartBound {
            expr,
            sources,
            coord_slot,
            dim,
        })
    }

    /// Value at phase coordinates `coords` (length `dim`).
    pub fn value<T: Real>(&self, coords: &[T]) -> Result<T, PoissonError> {
        debug_assert_eq!(coords.len(), self.dim);
        let vals: Vec<T> = self
            .sources
            .iter()
            .map(|s| match s {
                Source::Coord(i) => coords[*i],
                Source::Constant(c) => T::from_f64(*c),
            })
            .collect();
        Ok(self.expr.eval_slots(&vals)?)
    }

    /// Partial derivative with respect to phase coordinate `j`.
    pub fn partial<T: Real>(&self, coords: &[T], j: usize) -> Result<T, PoissonError> {
        debug_assert!(j < self.dim);
        if self.coord_slot[j].is_none() {
            // The coordinate does not appear: the derivative is exactly zero.
            return Ok(T::zero());
        }
        let vals: Vec<Dual<T>> = self
            .sources
            .iter()
            .map(|s| match s {
                Source::Coord(i) => {
                    if *i == j {
                        Dual::seeded(coords[*i])
                    } else {
                        Dual::constant(coords[*i])
                    }
                }
                Source::Constant(c) => Dual::from_f64(*c),
            })
            .collect();
        Ok(self.expr.eval_slots(&vals)?.eps)
    }

    /// Full phase gradient, one dual pass per coordinate that occurs.
    pub fn gradient<T: Real>(&self, coords: &[T]) -> Result<Vec<T>, PoissonError> {
        (0..self.dim).map(|j| self.partial(coords, j)).collect()
    }
}

/// Canonical bracket of two chart-bound expressions at raw coordinates,
/// generic over the scalar so the bracket itself can be differentiated.
pub(crate) fn bracket_core<T: Real>(
    f: &ChartBound,
    g: &ChartBound,
    dof: usize,
    coords: &[T],
) -> Result<T, PoissonError> {
    let gf = f.gradient(coords)?;
    let gg = g.gradient(coords)?;
    let mut acc = T::zero();
    for i in 0..dof {
        acc = acc + gf[i] * gg[dof + i] - gf[dof + i] * gg[i];
    }
    Ok(acc)
}

/// Hamiltonian vector field `X_H = (∂H/∂p, −∂H/∂q)` at a point.
pub fn ham_vector_field(h: &Expression, x: &PhasePoint) -> Result<TangentVector, PoissonError> {
    let chart = x.chart();
    let bound = ChartBound::new(h, chart)?;
    let grad = bound.gradient(x.coords())?;
    let n = chart.dof();
    let mut components = Vec::with_capacity(2 * n);
    components.extend_from_slice(&grad[n..]);
    components.extend(grad[..n].iter().map(|v| -v));
    Ok(TangentVector {
        chart: chart.clone(),
        components,
    })
}

/// Canonical Poisson bracket `{f, g}` evaluated at a point.
pub fn poisson_bracket(
    f: &Expression,
    g: &Expression,
    x: &PhasePoint,
) -> Result<f64, PoissonError> {
    let chart = x.chart();
    let fb = ChartBound::new(f, chart)?;
    let gb = ChartBound::new(g, chart)?;
    bracket_core(&fb, &gb, chart.dof(), x.coords())
}

/// Time derivative of an observable along the Hamiltonian flow:
/// `df/dt = {f, H}`.
pub fn time_derivative(
    f: &Expression,
    h: &Expression,
    x: &PhasePoint,
) -> Result<f64, PoissonError> {
    poisson_bracket(f, h, x)
}

/// Cyclic Jacobi sum `{f,{g,h}} + {g,{h,f}} + {h,{f,g}}` at a point.
///
/// Inner brackets are differentiated by running the bracket core over dual
/// scalars, so the result is exact up to roundoff; for a valid canonical
/// bracket it must vanish. Exposed for validation harnesses.
pub fn jacobi_residual(
    f: &Expression,
    g: &Expression,
    h: &Expression,
    x: &PhasePoint,
) -> Result<f64, PoissonError> {
    let chart = x.chart();
    let dof = chart.dof();
    let fb = ChartBound::new(f, chart)?;
    let gb = ChartBound::new(g, chart)?;
    let hb = ChartBound::new(h, chart)?;

    // {a, {b, c}} where the outer gradient of {b, c} is taken by seeding the
    // bracket core with dual coordinates.
    let nested = |a: &ChartBound, b: &ChartBound, c: &ChartBound| -> Result<f64, PoissonError> {
        let coords = x.coords();
        let ga = a.gradient(coords)?;
        let mut acc = 0.0;
        for j in 0..2 * dof {
            // Derivative of the inner bracket with respect to coordinate j.
            let seeded: Vec<Dual<f64>> = coords
                .iter()
                .enumerate()
                .map(|(i, &v)| {
                    if i == j {
                        Dual::seeded(v)
                    } else {
                        Dual::constant(v)
                    }
                })
                .collect();
            let dbc = bracket_core(b, c, dof, &seeded)?.eps;
            if j < dof {
                acc += ga[j + dof] * -dbc; // −∂f/∂p_j ∂{g,h}/∂q_j
            } else {
                acc += ga[j - dof] * dbc; // ∂f/∂q_j ∂{g,h}/∂p_j
            }
        }
        Ok(acc)
    };

    Ok(nested(&fb, &gb, &hb)? + nested(&gb, &hb, &fb)? + nested(&hb, &fb, &gb)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simple_chart() -> Arc<Chart> {
        Chart::new(
            "oscillator",
            vec!["q1".into(), "q2".into()],
            vec!["p1".into(), "p2".into()],
            Binding::new().with("m", 2.0),
        )
        .unwrap()
    }

    /// Adapted central-force chart (r, phi, rho | pr, pphi, prho) with the
    /// non-orthogonal kinetic coupling (2 rho / r) prho pr.
    fn central_chart() -> Arc<Chart> {
        Chart::new(
            "central-reduced",
            vec!["r".into(), "phi".into(), "rho".into()],
            vec!["pr".into(), "pphi".into(), "prho".into()],
            Binding::new().with("m", 1.0),
        )
        .unwrap()
    }

    fn central_kinetic() -> Expression {
        Expression::parse(
            "(prho^2 + pr^2 + (2*rho/r)*prho*pr + pphi^2/rho^2)/(2*m)",
        )
        .unwrap()
    }

    #[test]
    fn test_chart_rejects_malformed_inputs() {
        assert_eq!(
            Chart::new("x", vec![], vec![], Binding::new()).unwrap_err(),
            ChartError::Empty
        );
        assert_eq!(
            Chart::new("x", vec!["q".into()], vec![], Binding::new()).unwrap_err(),
            ChartError::MismatchedLengths { nq: 1, np: 0 }
        );
        assert_eq!(
            Chart::new(
                "x",
                vec!["q".into()],
                vec!["q".into()],
                Binding::new()
            )
            .unwrap_err(),
            ChartError::DuplicateName("q".into())
        );
        assert_eq!(
            Chart::new(
                "x",
                vec!["q".into()],
                vec!["p".into()],
                Binding::new().with("p", 1.0)
            )
            .unwrap_err(),
            ChartError::ConstantShadowsCoordinate("p".into())
        );
    }

    #[test]
    fn test_phase_point_validates_dimension_and_finiteness() {
        let chart = simple_chart();
        assert!(matches!(
            PhasePoint::new(chart.clone(), vec![1.0, 2.0]).unwrap_err(),
            PoissonError::DimensionMismatch { expected: 4, got: 2, .. }
        ));
        assert!(matches!(
            PhasePoint::new(chart.clone(), vec![1.0, 2.0, f64::NAN, 0.0]).unwrap_err(),
            PoissonError::NonFinite { .. }
        ));
        let x = PhasePoint::new(chart, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(x.get("p1"), Some(3.0));
    }

    #[test]
    fn test_canonical_relations_hold_to_machine_precision() {
        let chart = simple_chart();
        let x = PhasePoint::new(chart.clone(), vec![0.3, -1.1, 0.7, 2.5]).unwrap();
        let q: Vec<Expression> = ["q1", "q2"].iter().map(|n| Expression::symbol(n)).collect();
        let p: Vec<Expression> = ["p1", "p2"].iter().map(|n| Expression::symbol(n)).collect();
        for i in 0..2 {
            for j in 0..2 {
                let qq = poisson_bracket(&q[i], &q[j], &x).unwrap();
                let pp = poisson_bracket(&p[i], &p[j], &x).unwrap();
                let qp = poisson_bracket(&q[i], &p[j], &x).unwrap();
                assert_eq!(qq, 0.0);
                assert_eq!(pp, 0.0);
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((qp - expected).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn test_unbound_symbol_is_reported_with_chart_name() {
        let chart = simple_chart();
        let x = PhasePoint::new(chart, vec![0.0; 4]).unwrap();
        let f = Expression::parse("q1 + alpha").unwrap();
        let g = Expression::symbol("p1");
        match poisson_bracket(&f, &g, &x).unwrap_err() {
            PoissonError::UnboundSymbol { chart, symbol } => {
                assert_eq!(chart, "oscillator");
                assert_eq!(symbol, "alpha");
            }
            other => panic!("expected unbound symbol, got {other:?}"),
        }
    }

    #[test]
    fn test_harmonic_oscillator_field_matches_hand_values() {
        // H = (p1^2 + p2^2)/(2m) + (q1^2 + q2^2)/2 with m = 2.
        let chart = simple_chart();
        let h = Expression::parse("(p1^2 + p2^2)/(2*m) + (q1^2 + q2^2)/2").unwrap();
        let x = PhasePoint::new(chart, vec![1.0, -2.0, 4.0, 6.0]).unwrap();
        let v = ham_vector_field(&h, &x).unwrap();
        // dq = p/m = (2, 3); dp = -q = (-1, 2).
        assert_eq!(v.components(), &[2.0, 3.0, -1.0, 2.0]);
    }

    #[test]
    fn test_central_force_field_matches_hand_built_equations() {
        // At (r=1, phi=0, rho=1, pr=0, pphi=0, prho=1), m=1, V=0 the
        // non-orthogonal coupling feeds the momentum prho into both dr/dt
        // and drho/dt:
        //   dr/dt   = pr/m + (rho/r) prho/m   = 1
        //   dphi/dt = pphi/(m rho^2)          = 0
        //   drho/dt = prho/m + (rho/r) pr/m   = 1
        //   dpr/dt  = (rho/r^2) prho pr / m   = 0
        //   dpphi/dt = 0
        //   dprho/dt = -(1/(m r)) prho pr + pphi^2/(m rho^3) = 0
        let chart = central_chart();
        let k = central_kinetic();
        let x = PhasePoint::new(chart, vec![1.0, 0.0, 1.0, 0.0, 0.0, 1.0]).unwrap();
        let v = ham_vector_field(&k, &x).unwrap();
        let expected = [1.0, 0.0, 1.0, 0.0, 0.0, 0.0];
        for (got, want) in v.components().iter().zip(expected) {
            assert!(
                (got - want).abs() < 1e-15,
                "field {:?} differs from hand values {expected:?}",
                v.components()
            );
        }
    }

    #[test]
    fn test_bracket_of_prho_with_kinetic_matches_hand_value() {
        // {prho, K} = -(1/(m r)) prho pr + pphi^2/(m rho^3).
        // At (r=1, rho=1, pr=2, prho=3, pphi=0), m=1: -6.
        let chart = central_chart();
        let k = central_kinetic();
        let x = PhasePoint::new(chart, vec![1.0, 0.0, 1.0, 2.0, 0.0, 3.0]).unwrap();
        let f = Expression::symbol("prho");
        let v = poisson_bracket(&f, &k, &x).unwrap();
        assert!((v - -6.0).abs() < 1e-14, "got {v}");
    }

    #[test]
    fn test_time_derivative_equals_bracket_with_hamiltonian() {
        let chart = simple_chart();
        let h = Expression::parse("(p1^2 + p2^2)/(2*m) + q1*q2").unwrap();
        let f = Expression::parse("q1*p2").unwrap();
        let x = PhasePoint::new(chart, vec![0.4, -0.9, 1.3, 0.2]).unwrap();
        assert_eq!(
            time_derivative(&f, &h, &x).unwrap(),
            poisson_bracket(&f, &h, &x).unwrap()
        );
    }

    #[test]
    fn test_bracket_antisymmetry_and_leibniz_numerically() {
        let chart = simple_chart();
        let f = Expression::parse("q1^2*p2 + sin(q2)").unwrap();
        let g = Expression::parse("p1*p2 + q2^3/m").unwrap();
        let h = Expression::parse("q1*q2*p1").unwrap();
        let fg = Expression::parse("(q1^2*p2 + sin(q2))*(p1*p2 + q2^3/m)").unwrap();
        let x = PhasePoint::new(chart, vec![0.7, -0.2, 1.1, 0.5]).unwrap();

        let b_fg = poisson_bracket(&f, &g, &x).unwrap();
        let b_gf = poisson_bracket(&g, &f, &x).unwrap();
        assert!((b_fg + b_gf).abs() < 1e-12, "antisymmetry violated");

        // Leibniz: {f g, h} = f {g, h} + g {f, h}.
        let lhs = poisson_bracket(&fg, &h, &x).unwrap();
        let fv = f.eval(&to_binding(&x)).unwrap();
        let gv = g.eval(&to_binding(&x)).unwrap();
        let rhs = fv * poisson_bracket(&g, &h, &x).unwrap()
            + gv * poisson_bracket(&f, &h, &x).unwrap();
        assert!(
            (lhs - rhs).abs() < 1e-12 * (1.0 + lhs.abs()),
            "Leibniz violated: {lhs} vs {rhs}"
        );
    }

    #[test]
    fn test_jacobi_residual_vanishes_for_nonpolynomial_functions() {
        let chart = simple_chart();
        let f = Expression::parse("sin(q1)*p2^2").unwrap();
        let g = Expression::parse("q2*p1 + exp(q1/4)").unwrap();
        let h = Expression::parse("p1^2/(2*m) + q1^2*q2").unwrap();
        let x = PhasePoint::new(chart, vec![0.3, 0.9, -0.6, 1.4]).unwrap();
        let r = jacobi_residual(&f, &g, &h, &x).unwrap();
        assert!(r.abs() < 1e-12, "Jacobi residual {r}");
    }

    fn to_binding(x: &PhasePoint) -> Binding {
        x.chart()
            .coord_names()
            .zip(x.coords().iter())
            .map(|(n, v)| (n.to_string(), *v))
            .chain(x.chart().constants().iter().map(|(n, v)| (n.to_string(), v)))
            .collect()
    }
}
