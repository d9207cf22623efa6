//! Incremental row-echelon basis for spans of vectors.

use crate::field::{Field, Scalar};

#[derive(Clone, Debug)]
pub struct Echelon {
    field: Field,
    len: usize,
    /// Reduced rows, each with a unit pivot and zeros at earlier pivots.
    reduced: Vec<(usize, Vec<Scalar>)>,
    /// The vectors as they were inserted.
    originals: Vec<Vec<Scalar>>,
}

impl Echelon {
    pub fn new(field: &Field, len: usize) -> Echelon {
        Echelon {
            field: field.clone(),
            len,
            reduced: Vec::new(),
            originals: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.reduced.len()
    }

    pub fn vector_len(&self) -> usize {
        self.len
    }

    pub fn basis(&self) -> &[Vec<Scalar>] {
        &self.originals
    }

    /// Residual of `v` after elimination against the current basis.
    pub fn reduce(&self, v: &[Scalar]) -> Vec<Scalar> {
        let f = &self.field;
        let mut w = v.to_vec();
        for (pivot, row) in &self.reduced {
            if f.is_zero(&w[*pivot]) {
                continue;
            }
            let c = w[*pivot].clone();
            for (x, r) in w.iter_mut().zip(row) {
                if !f.is_zero(r) {
                    *x = f.sub(x, &f.mul(&c, r));
                }
            }
        }
        w
    }

    pub fn contains(&self, v: &[Scalar]) -> bool {
        self.reduce(v).iter().all(|x| self.field.is_zero(x))
    }

    /// Insert `v`; returns whether it enlarged the span.
    pub fn insert(&mut self, v: &[Scalar]) -> bool {
        assert_eq!(v.len(), self.len, "vector length");
        let f = self.field.clone();
        let mut w = self.reduce(v);
        let Some(pivot) = w.iter().position(|x| !f.is_zero(x)) else {
            return false;
        };
        let inv = f.inv(&w[pivot]).expect("nonzero pivot");
        for x in w.iter_mut() {
            *x = f.mul(x, &inv);
        }
        self.reduced.push((pivot, w));
        self.originals.push(v.to_vec());
        true
    }
}
