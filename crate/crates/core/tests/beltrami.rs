use std::f64::consts::TAU;

use knotflow::beltrami::{
    abc_contact_form, abc_curl, abc_divergence, abc_velocity, contact_volume_density, reeb_residual, std_tight_eval, AbcParams, CurlMode, Point3,
    Point4,
};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = AbcParams> {
    (0.0f64..2.0, 0.0f64..2.0, 0.0f64..2.0)
        .prop_filter("not all zero", |(a, b, c)| a + b + c > 1e-3)
        .prop_map(|(a, b, c)| AbcParams::new(a, b, c))
}

fn point() -> impl Strategy<Value = Point3> {
    (0.0f64..TAU, 0.0f64..TAU, 0.0f64..TAU).prop_map(|(x, y, z)| Point3::new(x, y, z))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 512, ..ProptestConfig::default() })]

    #[test]
    fn curl_is_velocity(p in params(), q in point()) {
        let u = abc_velocity(&p, &q);
        prop_assert!(abc_curl(&p, &q, CurlMode::ClosedForm).sub(&u).sup_norm() < 1e-14);
        prop_assert!(abc_curl(&p, &q, CurlMode::FiniteDifference(1e-4)).sub(&u).sup_norm() < 1e-6);
    }

    #[test]
    fn divergence_vanishes(p in params(), q in point()) {
        prop_assert!(abc_divergence(&p, &q, 1e-4).abs() < 1e-7);
    }

    #[test]
    fn contact_volume_is_speed_squared(p in params(), q in point()) {
        let u = abc_velocity(&p, &q);
        let form = abc_contact_form(&p, &q);
        prop_assert_eq!([form.ax, form.ay, form.az], u.to_array());
        let d = contact_volume_density(&p, &q, 1e-4);
        prop_assert!((d - u.dot(&u)).abs() < 1e-6 * (1.0 + d.abs()));
    }

    #[test]
    fn reeb_conditions_hold_away_from_zeros(p in params(), q in point()) {
        let speed = abc_velocity(&p, &q).norm();
        prop_assume!(speed > 1e-2);
        let r = reeb_residual(&p, &q, 1e-4).unwrap();
        prop_assert!(r.r1 < 1e-12);
        prop_assert!(r.r2 < 1e-6 / (speed * speed), "{:?}", r);
    }

    #[test]
    fn normalization_conjugates_fields(p in params(), q in point()) {
        let norm = p.normalize().unwrap();
        prop_assert!(norm.params.is_normalized());
        let lhs = abc_velocity(&norm.params, &norm.symmetry.apply_point(q));
        let rhs = norm.symmetry.apply_vector(abc_velocity(&p, &q)).scale(1.0 / norm.speed_scale);
        prop_assert!(lhs.sub(&rhs).sup_norm() < 1e-12);
        // nonsingularity depends only on the unordered amplitudes
        let perm = AbcParams::new(p.c, p.a, p.b);
        prop_assert_eq!(perm.is_nonsingular().unwrap(), p.is_nonsingular().unwrap());
    }

    #[test]
    fn tight_reeb_on_sphere(v in prop::array::uniform4(-1.0f64..1.0)) {
        let n = (v.iter().map(|x| x * x).sum::<f64>()).sqrt();
        prop_assume!(n > 1e-3);
        let q = Point4::new(v[0] / n, v[1] / n, v[2] / n, v[3] / n);
        let r = std_tight_eval(&q).unwrap();
        prop_assert!((r.alpha_on_reeb - 1.0).abs() < 1e-12);
        prop_assert!(r.kernel_residual < 1e-12);
    }
}

#[test]
fn off_sphere_rejected() {
    assert!(std_tight_eval(&Point4::new(1.0, 1.0, 0.0, 0.0)).is_err());
}
