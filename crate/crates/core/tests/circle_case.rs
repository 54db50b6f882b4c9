use helixflow::{Branch, CrossSectionMap, HelixConfig};

#[test]
fn circle_case_gradient_is_half_x_times_x_squared_minus_c() {
    for branch in [Branch::Positive, Branch::Negative] {
        let cfg = HelixConfig::new(0.0, branch, 1e-3, 1e-10).unwrap();
        let map = CrossSectionMap::new(&cfg).unwrap();
        for &x in &[0.93, 0.99, 1.0, 1.02, 1.08] {
            let t_min = map.t_min_of(x).unwrap();
            for i in 1..=10 {
                let t = t_min + (0.02 - t_min) * i as f64 / 10.0;
                let co = map.section_coefficients(x, t).unwrap();
                let f = 0.5 * x * (x * x - co.c);
                assert!(
                    (co.f - f).abs() <= 1e-14 * f.abs().max(1e-3),
                    "x={x} t={t}: {} vs {f}",
                    co.f
                );
            }
        }
    }
}

#[test]
fn circle_case_branches_share_c_and_mirror_h() {
    let plus = CrossSectionMap::new(&HelixConfig::new(0.0, Branch::Positive, 1e-3, 1e-10).unwrap())
        .unwrap();
    let minus =
        CrossSectionMap::new(&HelixConfig::new(0.0, Branch::Negative, 1e-3, 1e-10).unwrap())
            .unwrap();
    for &t in &[1e-5, 1e-4, 1e-3, 1e-2] {
        let a = plus.section_coefficients(1.01, t).unwrap();
        let b = minus.section_coefficients(1.01, t).unwrap();
        assert!((a.c - b.c).abs() <= 1e-9, "t={t}");
        assert!((a.h + b.h).abs() <= 1e-9, "t={t}");
    }
}
