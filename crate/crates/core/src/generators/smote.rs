use rand::Rng as _;

use crate::data::Table;
use crate::matrix::Matrix;
use crate::metrics::privacy::squared_distance;
use crate::rng::seeded;

/// Euclidean nearest neighbor of row `i` among `members`, excluding `i`.
/// Ties go to the lowest row index.
pub fn nearest_in_class(features: &Matrix, members: &[usize], i: usize) -> Option<usize> {
    let mut best: Option<(f64, usize)> = None;
    for &j in members {
        if j == i {
            continue;
        }
        let d = squared_distance(features.row(i), features.row(j));
        match best {
            Some((bd, bj)) if d > bd || (d == bd && j > bj) => {}
            _ => best = Some((d, j)),
        }
    }
    best.map(|(_, j)| j)
}

/// `x_i + gamma * (x_j - x_i)`, coordinatewise.
pub fn step_toward(xi: &[f64], xj: &[f64], gamma: f64) -> Vec<f64> {
    xi.iter()
        .zip(xj)
        .map(|(a, b)| a + gamma * (b - a))
        .collect()
}

/// Moves every row a `U(0, 1)` fraction of the way toward its nearest
/// same-class neighbor. Rows of single-member classes are copied unchanged.
pub fn smote_generate(train: &Table, n_classes: usize, seed: u64) -> Matrix {
    let groups = train.class_members(n_classes);
    let mut rng = seeded(seed);
    let mut out = train.features.clone();
    for (i, &label) in train.labels.iter().enumerate() {
        let Some(j) = nearest_in_class(&train.features, &groups[label], i) else {
            continue;
        };
        let gamma: f64 = rng.random();
        let row = step_toward(train.features.row(i), train.features.row(j), gamma);
        out.row_mut(i).copy_from_slice(&row);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> Table {
        Table::new(
            Matrix::from_rows(&[[0.0, 0.0], [1.0, 0.0], [5.0, 5.0], [0.9, 0.1], [4.0, 4.0]])
                .unwrap(),
            vec![0, 0, 0, 1, 1],
        )
        .unwrap()
    }

    #[test]
    fn nearest_neighbor_within_class() {
        let t = table();
        let groups = t.class_members(2);
        assert_eq!(nearest_in_class(&t.features, &groups[0], 0), Some(1));
        // (0.9, 0.1) belongs to class 1 so it is never a neighbor of class-0 rows
        assert_eq!(nearest_in_class(&t.features, &groups[0], 2), Some(1));
        assert_eq!(nearest_in_class(&t.features, &[0], 0), None);
    }

    #[test]
    fn distance_ties_take_lowest_index() {
        let m = Matrix::from_rows(&[[0.0], [1.0], [-1.0]]).unwrap();
        assert_eq!(nearest_in_class(&m, &[0, 1, 2], 0), Some(1));
        assert_eq!(nearest_in_class(&m, &[2, 1, 0], 0), Some(1));
    }

    #[test]
    fn endpoints_and_betweenness() {
        assert_eq!(step_toward(&[1.0, 2.0], &[3.0, 0.0], 0.0), vec![1.0, 2.0]);
        assert_eq!(step_toward(&[1.0, 2.0], &[3.0, 0.0], 1.0), vec![3.0, 0.0]);
        let t = table();
        let groups = t.class_members(2);
        let out = smote_generate(&t, 2, 4);
        for i in 0..t.n_rows() {
            let j = nearest_in_class(&t.features, &groups[t.labels[i]], i).unwrap();
            for c in 0..2 {
                let (a, b) = (t.features[(i, c)], t.features[(j, c)]);
                assert!(out[(i, c)] >= a.min(b) && out[(i, c)] <= a.max(b));
            }
        }
    }
}
