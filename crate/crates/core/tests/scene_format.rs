use fppm::math::{Purpose, RngStream, StreamKey, Vec3};
use fppm::scene::{parse_obj, parse_scene, parse_scene_with, serialize_scene, Emitter, Material, Shape};
use fppm::scenes;
use fppm::Error;
use proptest::prelude::*;

const CAM: &str = "camera pos=(0,0,5) look=(0,0,0) up=(0,1,0) fov=40 res=\"8x8\"\n";

fn err_at(text: &str) -> (usize, usize, String) {
    match parse_scene(text) {
        Err(Error::Parse { line, column, message }) => (line, column, message),
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn minimal_scene() {
    let s = parse_scene(&format!(
        "# comment\n\n{CAM}material m lambertian albedo=0.5\nsphere center=(0,0,0) radius=1 material=m\npointlight pos=(0,3,0) intensity=(1,2,3)\n"
    ))
    .unwrap();
    assert_eq!(s.camera.width, 8);
    assert_eq!(s.materials, vec![Material::Lambertian { albedo: fppm::math::Rgb::grey(0.5) }]);
    assert!(matches!(s.primitives[0].shape, Shape::Sphere { radius, .. } if radius == 1.0));
    assert!(matches!(s.emitters[0], Emitter::Point { .. }));
    assert!(s.has_chromatic_emitter());
}

#[test]
fn numbers_are_locale_independent_and_strict() {
    let ok = format!("{CAM}material m lambertian albedo=5e-1\n");
    parse_scene(&ok).unwrap();
    for bad in ["0,5", "1e999", "nan", "inf", ".5.", "1..0"] {
        let (line, col, _) = err_at(&format!("{CAM}material m lambertian albedo={bad}\n"));
        assert_eq!(line, 2, "{bad}");
        assert!(col >= 28, "{bad}: column {col}");
    }
}

#[test]
fn errors_carry_positions() {
    let (l, c, m) = err_at(&format!("{CAM}sphere center=(0,0,0) radius=1 material=nope\n"));
    assert_eq!((l, c), (2, 41));
    assert!(m.contains("nope"), "{m}");

    let (l, _, m) = err_at(&format!("{CAM}material m lambertian albedo=0.5\nquad corner=(0,0,0) e1=(1,0,0) e2=(2,0,0) material=m\n"));
    assert_eq!(l, 3);
    assert!(m.contains("parallel"), "{m}");

    let (l, c, m) = err_at(&format!("{CAM}bogus x=1\n"));
    assert_eq!((l, c), (2, 1));
    assert!(m.contains("bogus"));

    let (l, _, m) = err_at(&format!("{CAM}arealight shape=lamp radiance=1\n"));
    assert_eq!(l, 2);
    assert!(m.contains("dangling"), "{m}");

    let (l, _, m) = err_at("material m lambertian albedo=0.5\n");
    assert_eq!(l, 1);
    assert!(m.contains("no camera"));

    let (l, _, _) = err_at(&format!("{CAM}{CAM}"));
    assert_eq!(l, 2);

    let (_, _, m) = err_at(&format!("{CAM}material m lambertian albedo=1.5\n"));
    assert!(m.contains("albedo"), "{m}");

    let (_, _, m) = err_at(&format!("{CAM}material m lambertian albedo=0.5 extra=1\n"));
    assert!(m.contains("extra"), "{m}");

    let (_, _, m) = err_at(&format!("{CAM}spotlight pos=(0,0,1) dir=(0,0,-1) angle=120 intensity=1\n"));
    assert!(m.contains("angle"), "{m}");
}

#[test]
fn emit_tags_must_be_claimed() {
    let (l, _, m) = err_at(&format!(
        "{CAM}material m lambertian albedo=0.5\nquad corner=(0,0,0) e1=(1,0,0) e2=(0,1,0) material=m emit=a\n"
    ));
    assert_eq!(l, 3);
    assert!(m.contains("'a'"), "{m}");
}

#[test]
fn builtin_scenes_roundtrip_through_text() {
    for text in [
        scenes::cornell(16),
        scenes::caustic(8),
        scenes::textured_spot(8),
        scenes::furnace(4),
        scenes::step_plane(8),
    ] {
        let a = parse_scene(&text).unwrap();
        let canon = serialize_scene(&a);
        let b = parse_scene(&canon).unwrap();
        assert_eq!(a, b);
        assert_eq!(serialize_scene(&b), canon);
    }
}

#[test]
fn obj_subset() {
    let tris = parse_obj("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvn 0 0 1\nf 1//1 2//1 3//1 4//1\n# fan\nf -1 -2 -3\n").unwrap();
    assert_eq!(tris.len(), 3);
    match &tris[0] {
        Shape::Triangle { p, n } => {
            assert_eq!(p[1], Vec3::new(1.0, 0.0, 0.0));
            assert!(n.is_some());
        }
        _ => panic!(),
    }
    assert!(parse_obj("v 0 0 0\nf 1 2 3\n").is_err());
    assert!(parse_obj("v 0 0\n").is_err());
}

#[test]
fn meshes_load_through_the_resolver() {
    let text = format!("{CAM}material m lambertian albedo=0.5\nmesh obj=\"tri.obj\" material=m\n");
    let resolve = |name: &str| {
        if name == "tri.obj" {
            Ok(b"v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n".to_vec())
        } else {
            Err(std::io::Error::new(std::io::ErrorKind::NotFound, "missing"))
        }
    };
    let s = parse_scene_with(&text, &resolve).unwrap();
    assert_eq!(s.primitives.len(), 1);
    let again = parse_scene_with(&serialize_scene(&s), &resolve).unwrap();
    assert_eq!(s, again);
    let missing = format!("{CAM}material m lambertian albedo=0.5\nmesh obj=\"gone.obj\" material=m\n");
    assert!(matches!(parse_scene_with(&missing, &resolve), Err(Error::Parse { line: 3, .. })));
}

#[test]
fn bounding_radius_of_unit_box() {
    let s = parse_scene(&scenes::furnace(4)).unwrap();
    assert!((s.bounding_radius().unwrap() - 3f64.sqrt()).abs() < 1e-12);
    let empty = parse_scene(CAM).unwrap();
    assert!(empty.bounding_radius().is_err());
}

fn random_scene(seed: u64, offset: Vec3) -> String {
    let mut r = RngStream::new(seed, StreamKey { index: 0, iteration: 0, purpose: Purpose::Synthetic });
    let mut s = format!("{CAM}material m lambertian albedo=0.5\n");
    let v = |r: &mut RngStream, scale: f64| Vec3::new(r.normal() * scale, r.normal() * scale, r.normal() * scale);
    for _ in 0..1 + r.below(12) {
        let c = v(&mut r, 2.0) + offset;
        if r.uniform() < 0.5 {
            s += &format!("sphere center=({:?},{:?},{:?}) radius={:?} material=m\n", c.x, c.y, c.z, 0.1 + r.uniform());
        } else {
            let (a, b) = (v(&mut r, 1.0), v(&mut r, 1.0));
            if a.cross(b).length() < 1e-3 {
                continue;
            }
            s += &format!(
                "quad corner=({:?},{:?},{:?}) e1=({:?},{:?},{:?}) e2=({:?},{:?},{:?}) material=m\n",
                c.x, c.y, c.z, a.x, a.y, a.z, b.x, b.y, b.z
            );
        }
    }
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bvh_matches_brute_force(seed in 0u64..100_000) {
        let scene = parse_scene(&random_scene(seed, Vec3::ZERO)).unwrap();
        let mut r = RngStream::new(seed, StreamKey { index: 1, iteration: 0, purpose: Purpose::Synthetic });
        for _ in 0..150 {
            let o = Vec3::new(r.normal() * 4.0, r.normal() * 4.0, r.normal() * 4.0);
            let d = Vec3::new(r.normal(), r.normal(), r.normal()).normalized();
            let a = scene.intersect(o, d, 0.0, f64::INFINITY);
            let b = scene.intersect_brute_force(o, d, 0.0, f64::INFINITY);
            match (a, b) {
                (None, None) => {}
                (Some(a), Some(b)) => {
                    prop_assert!((a.dist - b.dist).abs() <= 1e-9 * b.dist.max(1.0));
                    prop_assert!(a.dist > 0.0);
                }
                (a, b) => prop_assert!(false, "bvh {:?} vs brute force {:?}", a.map(|h| h.dist), b.map(|h| h.dist)),
            }
        }
    }

    #[test]
    fn bounding_radius_is_translation_invariant(seed in 0u64..100_000, dx in -50.0f64..50.0, dy in -50.0f64..50.0) {
        let a = parse_scene(&random_scene(seed, Vec3::ZERO)).unwrap().bounding_radius().unwrap();
        let b = parse_scene(&random_scene(seed, Vec3::new(dx, dy, 0.0))).unwrap().bounding_radius().unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
    }

    #[test]
    fn parser_is_total(text in "[a-z0-9=(),. \"#\\n-]{0,200}") {
        // Never panics: either a scene or a positioned error.
        match parse_scene(&text) {
            Ok(_) | Err(Error::Parse { .. }) => {}
            Err(e) => prop_assert!(false, "unpositioned error {e}"),
        }
    }
}
