use std::f64::consts::TAU;

use irisveil::rubbersheet::{radial_resample, rotate_columns, sample, unwrap, UnwrappedIris};
use irisveil::{Ellipse, GrayImage};
use proptest::prelude::*;

fn grid(n_r: usize, n_theta: usize) -> impl Strategy<Value = UnwrappedIris> {
    (
        prop::collection::vec(0.0..255.0f64, n_r * n_theta),
        prop::collection::vec(prop::bool::weighted(0.9), n_r * n_theta),
    )
        .prop_map(move |(v, ok)| UnwrappedIris::new(n_r, n_theta, v, ok).unwrap())
}

fn sorted_row(u: &UnwrappedIris, r: usize) -> Vec<(u64, bool)> {
    let mut row: Vec<_> = (0..u.n_theta())
        .map(|c| (u.get(r, c).0.to_bits(), u.get(r, c).1))
        .collect();
    row.sort();
    row
}

proptest! {
    #[test]
    fn rotation_keeps_row_multisets(u in grid(5, 24), k in -100i64..100) {
        let rotated = rotate_columns(&u, k);
        for r in 0..5 {
            prop_assert_eq!(sorted_row(&u, r), sorted_row(&rotated, r));
        }
        prop_assert_eq!(rotate_columns(&rotated, -k), u.clone());
        prop_assert_eq!(rotate_columns(&u, 24), u);
    }

    #[test]
    fn same_size_resample_is_identity(u in grid(9, 16)) {
        let same = radial_resample(&u, 9).unwrap();
        for i in 0..u.values().len() {
            if u.valid()[i] {
                prop_assert!((same.values()[i] - u.values()[i]).abs() < 1e-9);
                prop_assert!(same.valid()[i]);
            }
        }
    }

    #[test]
    fn sample_at_nodes_reproduces_unwrap(seed in 0u64..1000, n_r in 2usize..12, n_theta in 8usize..64) {
        let img = GrayImage::from_fn(80, 80, |x, y| ((x * 7 + y * 13 + seed as usize) % 251) as u8);
        let inner = Ellipse::new(40.5, 39.0, 8.0, 6.0, 0.3).unwrap();
        let outer = Ellipse::new(40.0, 40.0, 25.0, 21.0, -0.2).unwrap();
        let u = unwrap(&img, &inner, &outer, n_r, n_theta).unwrap();
        for i in 0..n_r {
            for j in 0..n_theta {
                let r = i as f64 / (n_r - 1) as f64;
                let phi = TAU * j as f64 / n_theta as f64;
                prop_assert_eq!(sample(&u, r, phi), u.get(i, j));
            }
        }
    }
}

#[test]
fn unwrap_is_deterministic() {
    let img = GrayImage::from_fn(64, 64, |x, y| (x * y % 256) as u8);
    let inner = Ellipse::circle(32.0, 32.0, 6.0).unwrap();
    let outer = Ellipse::new(32.0, 31.0, 40.0, 25.0, 0.5).unwrap();
    let a = unwrap(&img, &inner, &outer, 16, 90).unwrap();
    let b = unwrap(&img, &inner, &outer, 16, 90).unwrap();
    assert_eq!(a, b);
    assert!(
        a.valid().iter().any(|v| !v),
        "outer ellipse crosses the frame"
    );
}
