use std::fmt::Write as _;

use axb_core::io::{parse_matrix_market_str, read_matrix_market};
use axb_core::{numerical_rank, Matrix};
use proptest::prelude::*;

/// Coordinate writer for round-trip checks; entries in `{:e}` are exact.
fn write_coordinate(m: &Matrix) -> String {
    let nnz = m.as_slice().iter().filter(|v| **v != 0.0).count();
    let mut out = String::from("%%MatrixMarket matrix coordinate real general\n");
    writeln!(out, "{} {} {}", m.rows(), m.cols(), nnz).unwrap();
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let v = m[(i, j)];
            if v != 0.0 {
                writeln!(out, "{} {} {:e}", i + 1, j + 1, v).unwrap();
            }
        }
    }
    out
}

fn sparse_matrix() -> impl Strategy<Value = Matrix> {
    (1usize..12, 1usize..12).prop_flat_map(|(r, c)| {
        prop::collection::vec(prop_oneof![3 => Just(0.0), 2 => -1e6f64..1e6], r * c)
            .prop_map(move |v| Matrix::new(r, c, v).unwrap())
    })
}

proptest! {
    #[test]
    fn parse_write_parse_is_idempotent(m in sparse_matrix()) {
        let once: Matrix = parse_matrix_market_str(&write_coordinate(&m)).unwrap();
        prop_assert_eq!(&once, &m);
        let twice: Matrix = parse_matrix_market_str(&write_coordinate(&once)).unwrap();
        prop_assert_eq!(twice, once);
    }
}

#[test]
fn symmetric_and_pattern_files() {
    let text = "%%MatrixMarket matrix coordinate pattern symmetric\n3 3 3\n1 1\n3 1\n3 2\n";
    let m: Matrix = parse_matrix_market_str(text).unwrap();
    assert_eq!(m[(0, 2)], 1.0);
    assert_eq!(m[(2, 0)], 1.0);
    assert_eq!(m[(1, 1)], 0.0);
    assert_eq!(numerical_rank(&m), 3);
}

/// The four sparse test matrices, when a directory holding them is given
/// through `AXB_SPARSE_DIR`.
#[test]
fn sparse_suite_shapes_when_available() {
    let Ok(dir) = std::env::var("AXB_SPARSE_DIR") else {
        eprintln!("AXB_SPARSE_DIR unset, skipping");
        return;
    };
    let dir = std::path::PathBuf::from(dir);
    for (name, rows, cols) in [
        ("ash219.mtx", 219, 85),
        ("ash958.mtx", 958, 292),
        ("divorce.mtx", 50, 9),
        ("Worldcities.mtx", 315, 100),
    ] {
        let m: Matrix = read_matrix_market(dir.join(name)).unwrap();
        assert_eq!(m.shape(), (rows, cols), "{name}");
        assert_eq!(numerical_rank(&m), cols, "{name}");
        let again: Matrix = parse_matrix_market_str(&write_coordinate(&m)).unwrap();
        assert_eq!(again, m, "{name}");
    }
}
