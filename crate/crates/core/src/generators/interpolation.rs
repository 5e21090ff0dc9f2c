use rand::Rng as _;

use crate::data::Table;
use crate::matrix::Matrix;
use crate::rng::seeded;

/// `lambda * a + (1 - lambda) * b`, coordinatewise.
pub fn blend_rows(a: &[f64], b: &[f64], lambda: f64) -> Vec<f64> {
    a.iter()
        .zip(b)
        .map(|(x, y)| lambda * x + (1.0 - lambda) * y)
        .collect()
}

/// Each row is blended with a uniformly drawn other member of its class using
/// `lambda ~ U(0, 1)`. Rows of single-member classes are copied unchanged.
pub fn interpolate_same_class(train: &Table, n_classes: usize, seed: u64) -> Matrix {
    let groups = train.class_members(n_classes);
    let mut rng = seeded(seed);
    let mut out = train.features.clone();
    for (i, &label) in train.labels.iter().enumerate() {
        let members = &groups[label];
        if members.len() < 2 {
            continue;
        }
        // draw among the other members: skip over row i's own slot
        let pos = members.binary_search(&i).expect("row belongs to its class");
        let mut k = rng.random_range(0..members.len() - 1);
        if k >= pos {
            k += 1;
        }
        let j = members[k];
        let lambda: f64 = rng.random();
        let row = blend_rows(train.features.row(i), train.features.row(j), lambda);
        out.row_mut(i).copy_from_slice(&row);
    }
    out
}
