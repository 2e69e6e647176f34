use camhull_core::camera::{CameraIntrinsics, CameraPose};
use camhull_core::geometry::primitives::box_mesh;
use camhull_core::math::Vec3;
use camhull_core::render::render_depth;
use camhull_core::solvers::fit_surrogate;
use camhull_core::voxel::{combine, complement_identity_check, AttributeField, FieldMode, LabelSet};
use proptest::prelude::*;

fn fields(mode: FieldMode, codes: Vec<Vec<u8>>) -> Vec<AttributeField> {
    codes
        .into_iter()
        .map(|c| AttributeField::from_codes(mode, [c.len(), 1, 1], c))
        .collect()
}

fn hull_codes() -> impl Strategy<Value = Vec<Vec<u8>>> {
    (1usize..=6, 1usize..40).prop_flat_map(|(m, v)| prop::collection::vec(prop::collection::vec(0u8..4, v), m))
}

proptest! {
    #[test]
    fn complement_identity_holds(codes in hull_codes(), bits in 1u8..15) {
        let f = fields(FieldMode::Hull, codes);
        let labels = LabelSet::from_codes(&(0..4).filter(|c| bits & (1 << c) != 0).collect::<Vec<u8>>());
        for k in 1..=f.len() {
            prop_assert!(complement_identity_check(&f, labels, k).unwrap());
        }
    }

    #[test]
    fn thresholds_nest(codes in hull_codes()) {
        let f = fields(FieldMode::Hull, codes);
        let view = combine(&f, LabelSet::HULL, 1).unwrap();
        for k in 1..f.len() {
            let (a, b) = (view.members(k), view.members(k + 1));
            prop_assert!(a.iter().zip(&b).all(|(a, b)| *a || !*b));
        }
    }

    #[test]
    fn pixel_of_accepts_exactly_the_image(u in -2.0f64..70.0, v in -2.0f64..50.0) {
        let k = CameraIntrinsics::with_defaults(64, 48).unwrap();
        let inside = (0.5..64.5).contains(&u) && (0.5..48.5).contains(&v);
        prop_assert_eq!(k.pixel_of(u, v).is_some(), inside);
    }

    #[test]
    fn box_depth_is_at_least_the_distance_to_the_box(
        x in 1.0f64..3.0, y in -1.0f64..1.0, z in -1.0f64..1.0, pan in -0.3f64..0.3,
    ) {
        let faces: Vec<_> = box_mesh("b", Vec3::new(4.0, -1.0, -1.0), Vec3::new(6.0, 1.0, 1.0)).triangles().collect();
        let pose = CameraPose::from_pan_tilt(Vec3::new(x - 3.0, y, z), pan, 0.0).unwrap();
        let img = render_depth(&pose, &CameraIntrinsics::with_defaults(40, 30).unwrap(), &faces);
        let gap = 4.0 - (x - 3.0);
        prop_assert!(img.data().iter().all(|&d| d >= gap - 1e-9));
        prop_assert!(img.finite_count() > 0);
    }

    #[test]
    fn surrogate_interpolates_samples(seed_values in prop::collection::vec(-1e3f64..1e3, 12)) {
        let sites: Vec<Vec<f64>> = (0..12)
            .map(|i| vec![(i as f64 * 0.37).fract(), (i as f64 * 0.61).fract()])
            .collect();
        let m = fit_surrogate(&sites, &seed_values).unwrap();
        prop_assert!(m.max_relative_error() <= 1e-8);
    }
}
