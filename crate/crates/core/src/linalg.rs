//! Row reduction over any [`Field`].

use crate::scalar::Field;

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref<F: Field>(field: &F, m: &mut [Vec<F::Elem>]) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(pr) = (r..rows).find(|&i| !field.is_zero(&m[i][c])) else {
            continue;
        };
        m.swap(r, pr);
        let inv = field.inv(&m[r][c]).expect("pivot is nonzero");
        for x in m[r].iter_mut() {
            *x = field.mul(x, &inv);
        }
        for i in 0..rows {
            if i != r && !field.is_zero(&m[i][c]) {
                let f = m[i][c].clone();
                let pivot_row = m[r].clone();
                for (x, y) in m[i].iter_mut().zip(&pivot_row) {
                    *x = field.sub(x, &field.mul(&f, y));
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank<F: Field>(field: &F, m: &[Vec<F::Elem>]) -> usize {
    let mut work = m.to_vec();
    rref(field, &mut work).len()
}

/// A basis of `{x : m x = 0}`, each vector scaled so its first nonzero entry is one.
pub fn kernel<F: Field>(field: &F, m: &[Vec<F::Elem>], cols: usize) -> Vec<Vec<F::Elem>> {
    let mut work = m.to_vec();
    let pivots = rref(field, &mut work);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&fc| {
            let mut v = vec![field.zero(); cols];
            v[fc] = field.one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = field.neg(&work[r][fc]);
            }
            let lead = v
                .iter()
                .find(|x| !field.is_zero(x))
                .expect("nonzero")
                .clone();
            let inv = field.inv(&lead).expect("nonzero");
            v.iter().map(|x| field.mul(x, &inv)).collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, PrimeField, Rationals};

    #[test]
    fn rank_and_kernel_over_rationals() {
        let q = Rationals;
        let m = vec![
            vec![rat(1, 1), rat(2, 1), rat(3, 1)],
            vec![rat(2, 1), rat(4, 1), rat(6, 1)],
            vec![rat(1, 1), rat(0, 1), rat(1, 1)],
        ];
        assert_eq!(rank(&q, &m), 2);
        let k = kernel(&q, &m, 3);
        assert_eq!(k.len(), 1);
        for row in &m {
            let dot = row
                .iter()
                .zip(&k[0])
                .fold(rat(0, 1), |acc, (a, b)| acc + a * b);
            assert_eq!(dot, rat(0, 1));
        }
        assert_eq!(k[0][0], rat(1, 1));
    }

    #[test]
    fn rank_mod_p() {
        let f = PrimeField::new(3).unwrap();
        let m = vec![vec![1u64, 1], vec![2, 2]];
        assert_eq!(rank(&f, &m), 1);
        assert_eq!(kernel(&f, &m, 2), vec![vec![1, 2]]);
    }
}
