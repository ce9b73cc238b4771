//! Exact Poisson bracket of sparse polynomials.

use crate::poisson::Chart;

use super::SparsePoly;

/// Canonical Poisson bracket `{f, g} = Σᵢ ∂f/∂qᵢ ∂g/∂pᵢ − ∂f/∂pᵢ ∂g/∂qᵢ`,
/// computed exactly over the chart's coordinate/momentum pairs.
///
/// Variables of `f` and `g` that are not chart coordinates (mass and other
/// constants kept symbolic) differentiate to zero and simply ride along in
/// the coefficients, so the result stays fully symbolic in them.
pub fn poly_poisson(f: &SparsePoly, g: &SparsePoly, chart: &Chart) -> SparsePoly {
    let mut acc = SparsePoly::zero();
    for (q, p) in chart.q_names().iter().zip(chart.p_names().iter()) {
        let fq = f.partial(q);
        let fp = f.partial(p);
        // Skip pairs that touch neither argument; brackets of catalog
        // Hamiltonians are sparse in the chart.
        if fq.is_zero() && fp.is_zero() {
            continue;
        }
        acc = &acc + &(&fq * &g.partial(p));
        acc = &acc - &(&fp * &g.partial(q));
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{Binding, Expression};
    use crate::poisson::{poisson_bracket, Chart, PhasePoint};
    use crate::polyalg::poly_from_expression;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use rand::Rng;
    use rand::SeedableRng;

    fn central_force_chart() -> std::sync::Arc<Chart> {
        Chart::new(
            "central-force-reduced",
            vec!["r".into(), "phi".into(), "rho".into()],
            vec!["pr".into(), "pphi".into(), "prho".into()],
            Binding::new().with("m", 1.0),
        )
        .unwrap()
    }

    fn poly(src: &str) -> SparsePoly {
        poly_from_expression(&Expression::parse(src).unwrap()).unwrap()
    }

    /// Reduced central-force energy with a Coulomb-style potential; exact
    /// Laurent polynomial in the chart variables and the mass symbol.
    fn central_force_energy() -> SparsePoly {
        poly("(prho^2 + pr^2 + (2*rho/r)*prho*pr + pphi^2/rho^2)/(2*m) - 1/r")
    }

    #[test]
    fn test_canonical_pairs_bracket_to_one_exactly() {
        let chart = central_force_chart();
        let one = SparsePoly::int(1);
        for (q, p) in chart.q_names().iter().zip(chart.p_names().iter()) {
            let qp = SparsePoly::variable(q);
            let pp = SparsePoly::variable(p);
            assert_eq!(poly_poisson(&qp, &pp, &chart), one);
            assert_eq!(poly_poisson(&pp, &qp, &chart), -&one);
            assert!(poly_poisson(&qp, &qp, &chart).is_zero());
            assert!(poly_poisson(&pp, &pp, &chart).is_zero());
        }
    }

    #[test]
    fn test_angular_momentum_conservation_is_exact() {
        // [DERIVED] The energy has no phi dependence, so {pphi, K} vanishes
        // identically — not to tolerance, but as the zero polynomial.
        let chart = central_force_chart();
        let k = central_force_energy();
        let pphi = SparsePoly::variable("pphi");
        assert!(poly_poisson(&pphi, &k, &chart).is_zero());
    }

    #[test]
    fn test_cylindrical_momentum_bracket_matches_hand_expansion() {
        // [DERIVED] {prho, K} = -(1/(m*r))*prho*pr + (1/(m*rho^3))*pphi^2,
        // from ∂K/∂rho = (2/(2m*r))*prho*pr - (2/(2m))*pphi^2/rho^3 and
        // {prho, K} = -∂K/∂rho.
        let chart = central_force_chart();
        let k = central_force_energy();
        let prho = SparsePoly::variable("prho");
        let got = poly_poisson(&prho, &k, &chart);
        let expected = &SparsePoly::monomial(
            BigRational::from_integer(BigInt::from(-1)),
            &[("m", -1), ("r", -1), ("prho", 1), ("pr", 1)],
        ) + &SparsePoly::monomial(
            BigRational::from_integer(BigInt::from(1)),
            &[("m", -1), ("rho", -3), ("pphi", 2)],
        );
        assert_eq!(got, expected);
    }

    #[test]
    fn test_exact_bracket_matches_numeric_bracket_at_random_points() {
        // The polynomial route and the dual-number route must agree wherever
        // both are defined; this pins the two implementations to each other.
        let chart = central_force_chart();
        let k = Expression::parse(
            "(prho^2 + pr^2 + (2*rho/r)*prho*pr + pphi^2/rho^2)/(2*m) - 1/r",
        )
        .unwrap();
        let f = Expression::parse("prho^2*rho - pr*pphi/r + r^2*phi").unwrap();
        let pk = poly_from_expression(&k).unwrap();
        let pf = poly_from_expression(&f).unwrap();
        let exact = poly_poisson(&pf, &pk, &chart);

        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x706f_6c79);
        for _ in 0..50 {
            let vals: Vec<f64> = (0..6).map(|_| rng.gen_range(0.3..2.0)).collect();
            let x = PhasePoint::new(chart.clone(), vals.clone()).unwrap();
            let numeric = poisson_bracket(&f, &k, &x).unwrap();
            let binding = Binding::new()
                .with("r", vals[0])
                .with("phi", vals[1])
                .with("rho", vals[2])
                .with("pr", vals[3])
                .with("pphi", vals[4])
                .with("prho", vals[5])
                .with("m", 1.0);
            let symbolic = exact.eval_f64(&binding).unwrap();
            assert!(
                (numeric - symbolic).abs() <= 1e-10 * (1.0 + symbolic.abs()),
                "mismatch: numeric {numeric} vs exact {symbolic}"
            );
        }
    }

    #[test]
    fn test_jacobi_identity_holds_exactly_for_random_polynomials() {
        // Exact arithmetic turns the Jacobi identity into a structural zero.
        let chart = Chart::new(
            "planar",
            vec!["q1".into(), "q2".into()],
            vec!["p1".into(), "p2".into()],
            Binding::new(),
        )
        .unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x6a61_636f);
        let vars = ["q1", "q2", "p1", "p2"];
        let random_poly = |rng: &mut rand_chacha::ChaCha8Rng| {
            let mut p = SparsePoly::zero();
            for _ in 0..4 {
                let c = BigRational::new(
                    BigInt::from(rng.gen_range(-9i64..=9)),
                    BigInt::from(rng.gen_range(1i64..=9)),
                );
                let powers: Vec<(&str, i32)> = vars
                    .iter()
                    .map(|v| (*v, rng.gen_range(0..=2)))
                    .collect();
                p = &p + &SparsePoly::monomial(c, &powers);
            }
            p
        };
        for _ in 0..10 {
            let f = random_poly(&mut rng);
            let g = random_poly(&mut rng);
            let h = random_poly(&mut rng);
            let cyclic = &(&poly_poisson(&poly_poisson(&f, &g, &chart), &h, &chart)
                + &poly_poisson(&poly_poisson(&g, &h, &chart), &f, &chart))
                + &poly_poisson(&poly_poisson(&h, &f, &chart), &g, &chart);
            assert!(cyclic.is_zero(), "Jacobi residual: {cyclic}");
        }
    }
}
