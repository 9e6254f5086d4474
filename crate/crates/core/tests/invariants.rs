use proptest::prelude::*;

use tml_core::geometry::{basis_curve, vec4, CliffordTorus, LoopR4, Vec4};
use tml_core::isotopy_lab::{
    clifford_path_transport, simulate_case1, simulate_case2, simulate_case2_variant, IsotopyReport,
};
use tml_core::linking::{gauss_linking, meridian, preimage_degree, DegreeGrid, TorusSurface};
use tml_core::maslov::{framing_index, make_m_framing, maslov_class_eval};
use tml_core::monodromy_groups::{classify, GroupTag};
use tml_core::{MaslovCovector, Mat2Z};

fn reports() -> Vec<IsotopyReport> {
    vec![
        simulate_case1(1.0, 256).unwrap(),
        simulate_case2(1.0, 0.05, 512, 256).unwrap(),
        simulate_case2_variant(1.0, 0.05, 512, 256).unwrap(),
        clifford_path_transport(&[(1.0, 1.0), (2.0, 3.0)], 64).unwrap(),
    ]
}

#[test]
fn simulated_monodromies_preserve_maslov_class() {
    let t = CliffordTorus::new(1.0, 1.0).unwrap();
    for r in reports() {
        assert!(matches!(classify(&r.monodromy).unwrap(), GroupTag::GmuPlus | GroupTag::GmuMinus));
        assert_eq!(MaslovCovector::CLIFFORD.compose(&r.monodromy).unwrap(), MaslovCovector::CLIFFORD);
        let (c1, c2) = r.class_images;
        assert_eq!(Mat2Z::from_columns(c1, c2), r.monodromy);
        // The Maslov index of an image class matches that of the original class.
        for (orig, image) in [((1, 0), c1), ((0, 1), c2)] {
            let before = maslov_class_eval(&t, orig.0, orig.1, 512).unwrap().index;
            let after = maslov_class_eval(&t, image.n1, image.n2, 512).unwrap().index;
            assert_eq!(before, after, "{:?}", r.monodromy);
        }
    }
}

#[test]
fn monodromy_composition() {
    let rs = reports();
    let once = &rs[1];
    let twice = once.then(once).unwrap();
    assert_eq!(twice.monodromy, Mat2Z::IDENTITY);
    let mixed = rs[0].then(&rs[1]).unwrap().then(&rs[0]).unwrap();
    assert_eq!(mixed.monodromy, rs[2].monodromy);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn framing_twists_shift_index(m in -4i64..=4, k in -3i64..=3, a in 0.5f64..2.0, b in 0.5f64..2.0) {
        let t = CliffordTorus::new(a, b).unwrap();
        let c = basis_curve(&t, 1, 0).unwrap();
        let sigma = make_m_framing(&c, m, 256).unwrap();
        prop_assert_eq!(framing_index(&c, &sigma).unwrap().value(), 2 * m);
        prop_assert_eq!(framing_index(&c, &sigma.twisted(k)).unwrap().value(), 2 * (m + k));
    }

    #[test]
    fn meridian_degree_survives_small_translations(d in prop::array::uniform4(-0.15f64..0.15)) {
        let t = CliffordTorus::new(1.0, 1.0).unwrap();
        let c = meridian(&t, 0.5).unwrap().translated(Vec4::from(d));
        let surface = TorusSurface::Clifford(t);
        let r = gauss_linking(&c, &surface, DegreeGrid::cube(32)).unwrap();
        prop_assert_eq!(r.rounded, -1);
        prop_assert_eq!(preimage_degree(&c, &surface, DegreeGrid::cube(32)).unwrap(), -1);
    }

    #[test]
    fn tilted_far_circles_do_not_link(ox in 3.0f64..6.0, phi in 0.0f64..6.0) {
        let t = CliffordTorus::new(1.0, 1.0).unwrap();
        let c = LoopR4::Circle {
            center: vec4(ox, 0.0, 0.0, 0.0),
            u: vec4(phi.cos(), phi.sin(), 0.0, 0.0),
            v: vec4(0.0, 0.0, phi.sin(), phi.cos()),
        };
        let r = gauss_linking(&c, &TorusSurface::Clifford(t), DegreeGrid::cube(24)).unwrap();
        prop_assert_eq!(r.rounded, 0);
    }
}
