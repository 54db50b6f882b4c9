use std::sync::{Arc, OnceLock};

use proptest::prelude::*;

use helixflow::{Branch, CrossSectionMap, FlowSampler, HelixConfig};

fn map(branch: Branch) -> Arc<CrossSectionMap> {
    static PLUS: OnceLock<Arc<CrossSectionMap>> = OnceLock::new();
    static MINUS: OnceLock<Arc<CrossSectionMap>> = OnceLock::new();
    let cell = match branch {
        Branch::Positive => &PLUS,
        Branch::Negative => &MINUS,
    };
    cell.get_or_init(|| {
        let cfg = HelixConfig::new(1.0, branch, 1e-3, 1e-10).unwrap();
        Arc::new(CrossSectionMap::new(&cfg).unwrap())
    })
    .clone()
}

fn branch() -> impl Strategy<Value = Branch> {
    prop_oneof![Just(Branch::Positive), Just(Branch::Negative)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn y_t_round_trip(b in branch(), x in 0.95f64..1.05, u in 0.0f64..1.0) {
        let m = map(b);
        let t_min = m.t_min_of(x).unwrap();
        let t = t_min + (0.02 - t_min) * u.max(1e-6);
        let y = m.y_from_t(x, t).unwrap();
        let back = m.t_from_y(x, y).unwrap();
        prop_assert!((back - t).abs() <= 1e-9 * t, "t {t} -> y {y} -> {back}");
        prop_assert_eq!(m.t_from_y(x, -y).unwrap(), back);
    }

    #[test]
    fn y_increases_with_t(b in branch(), x in 0.95f64..1.05, u in 0.01f64..0.9) {
        let m = map(b);
        let t_min = m.t_min_of(x).unwrap();
        let t1 = t_min + (0.02 - t_min) * u;
        let t2 = t_min + (0.02 - t_min) * (u + 0.05);
        prop_assert!(m.y_from_t(x, t2).unwrap() > m.y_from_t(x, t1).unwrap());
    }

    #[test]
    fn raw_field_invariants(
        b in branch(),
        rho in 0.96f64..1.04,
        phi in -0.05f64..0.05,
        z in -0.05f64..0.05,
        shift in -3.0f64..3.0,
    ) {
        let s = FlowSampler::raw(map(b));
        let a = s.sample_raw(rho, phi, z).unwrap();
        // speed and pressure are tied algebraically
        prop_assert!((a.speed_sq() - 3.0 * a.p).abs() <= 1e-12 * (3.0 * a.p).max(1e-300));
        // helical invariance: (phi, z) -> (phi + a, z + k a) with k = 1
        let b2 = s.sample_raw(rho, phi + shift, z + shift).unwrap();
        let tol = 1e-10 * a.speed_sq().sqrt().max(1e-12);
        prop_assert!((a.u_rho - b2.u_rho).abs() <= tol);
        prop_assert!((a.u_z - b2.u_z).abs() <= tol);
        prop_assert!((a.u_phi - b2.u_phi).abs() <= tol);
    }

    #[test]
    fn cutoff_vanishes_outside_window(
        rho in 0.93f64..1.07,
        phi in -0.05f64..0.05,
        z in -0.1f64..0.1,
    ) {
        let s = FlowSampler::cutoff(map(Branch::Positive), 1e-3).unwrap();
        let c = s.sample_cutoff(rho, phi, z).unwrap();
        if !(c.t > 1e-3 && c.t < 2e-3) {
            prop_assert_eq!(c.speed_sq(), 0.0);
        } else {
            let r = s.sample_raw(rho, phi, z).unwrap();
            prop_assert!(c.speed_sq() <= r.speed_sq());
        }
    }
}
