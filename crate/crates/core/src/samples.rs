//! Flat storage for batches of LWE samples.

use rand::seq::SliceRandom;

use crate::rng::StreamRng;

/// An owned sample `(a, b)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LweSample {
    pub a: Vec<u16>,
    pub b: u16,
}

/// A borrowed view of one stored sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleRef<'a> {
    pub a: &'a [u16],
    pub b: u16,
}

impl SampleRef<'_> {
    pub fn to_owned(self) -> LweSample {
        LweSample {
            a: self.a.to_vec(),
            b: self.b,
        }
    }
}

/// Row-major batch of samples: each row is the `n` entries of `a` followed by `b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Samples {
    n: usize,
    data: Vec<u16>,
}

impl Samples {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            data: Vec::new(),
        }
    }

    pub fn with_capacity(n: usize, rows: usize) -> Self {
        Self {
            n,
            data: Vec::with_capacity(rows * (n + 1)),
        }
    }

    /// Width of the `a` vectors.
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn stride(&self) -> usize {
        self.n + 1
    }

    pub fn len(&self) -> usize {
        self.data.len() / (self.n + 1)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn push(&mut self, a: &[u16], b: u16) {
        assert_eq!(a.len(), self.n, "sample width mismatch");
        self.data.extend_from_slice(a);
        self.data.push(b);
    }

    /// Appends a full row (`a` followed by `b`).
    pub fn push_row(&mut self, row: &[u16]) {
        assert_eq!(row.len(), self.n + 1, "row width mismatch");
        self.data.extend_from_slice(row);
    }

    pub fn row(&self, i: usize) -> &[u16] {
        let s = self.stride();
        &self.data[i * s..(i + 1) * s]
    }

    pub fn get(&self, i: usize) -> SampleRef<'_> {
        let row = self.row(i);
        SampleRef {
            a: &row[..self.n],
            b: row[self.n],
        }
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = SampleRef<'_>> + '_ {
        self.data.chunks_exact(self.stride()).map(move |row| SampleRef {
            a: &row[..self.n],
            b: row[self.n],
        })
    }

    pub fn rows(&self) -> &[u16] {
        &self.data
    }

    pub fn truncate(&mut self, rows: usize) {
        self.data.truncate(rows * self.stride());
    }

    /// Applies a seeded permutation to the rows; returns the permutation so
    /// parallel per-sample data can be reordered alongside.
    pub fn shuffle(&mut self, rng: &mut StreamRng) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.shuffle(rng);
        *self = self.select(&order);
        order
    }

    pub fn select(&self, indices: &[usize]) -> Samples {
        let mut out = Samples::with_capacity(self.n, indices.len());
        for &i in indices {
            out.push_row(self.row(i));
        }
        out
    }

    pub fn to_vec(&self) -> Vec<LweSample> {
        self.iter().map(SampleRef::to_owned).collect()
    }

    pub fn from_samples(n: usize, samples: &[LweSample]) -> Self {
        let mut out = Samples::with_capacity(n, samples.len());
        for s in samples {
            out.push(&s.a, s.b);
        }
        out
    }
}
