use camhull::obj::{load_obj, obj_string, parse_obj, write_obj, ObjError};
use camhull_core::geometry::primitives::box_mesh;
use camhull_core::math::Vec3;

#[test]
fn unit_cube_parses_to_twelve_faces() {
    let text = "\
# unit cube
o cube
v 0 0 0
v 1 0 0
v 1 1 0
v 0 1 0
v 0 0 1
v 1 0 1
v 1 1 1
v 0 1 1
vn 0 0 1
f 1 4 3 2
f 5 6 7 8
f 1 2 6 5
f 2 3 7 6
f 3 4 8 7
f 4 1 5 8
";
    let mesh = parse_obj("cube", text).unwrap();
    assert_eq!(mesh.vertices().len(), 8);
    assert_eq!(mesh.faces().len(), 12);
    mesh.check_watertight().unwrap();
}

#[test]
fn quad_with_texture_and_normal_indices_is_fanned() {
    let text = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1/1/1 2/2/1 3/3/1 4/4/1\n";
    let mesh = parse_obj("quad", text).unwrap();
    assert_eq!(mesh.faces(), &[[0, 1, 2], [0, 2, 3]]);
}

#[test]
fn negative_indices_count_back() {
    let text = "v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3 -2 -1\n";
    let mesh = parse_obj("tri", text).unwrap();
    assert_eq!(mesh.faces(), &[[0, 1, 2]]);
}

#[test]
fn out_of_range_index_is_a_structure_error() {
    let text = "v 0 0 0\nv 1 0 0\nv 0 1 0\n\nf 1 2 99\n";
    let err = parse_obj("bad", text).unwrap_err();
    assert!(matches!(err, ObjError::Structure(_)), "{err}");
    assert!(err.to_string().contains("98"), "{err}");
}

#[test]
fn unknown_records_are_rejected() {
    let err = parse_obj("bad", "v 0 0 0\ncurv 1 2\n").unwrap_err();
    assert!(matches!(err, ObjError::Parse { line: 2, .. }), "{err}");
}

#[test]
fn round_trip_through_a_file() {
    let mesh = box_mesh("crate", Vec3::new(-1.0, 0.5, 0.0), Vec3::new(2.0, 1.5, 0.75));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("crate.obj");
    write_obj(&mesh, &path).unwrap();
    let back = load_obj(&path).unwrap();
    assert_eq!(back.name(), "crate");
    assert_eq!(back.vertices(), mesh.vertices());
    assert_eq!(back.faces(), mesh.faces());
    assert_eq!(obj_string(&back), obj_string(&mesh));
}

#[test]
fn missing_file_is_an_io_error() {
    let err = load_obj(std::path::Path::new("/nonexistent/mesh.obj")).unwrap_err();
    assert!(matches!(err, ObjError::Io { .. }));
}
