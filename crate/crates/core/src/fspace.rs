//! Curves on a shared grid, their L² geometry, and the Gram matrix.
//!
//! Curves live in L²[0, 1] but are observed at m points t_1 < ... < t_m in
//! (0, 1]. Integrals are replaced by a fixed quadrature rule, so the inner
//! product is ⟨f, g⟩ = Σ_i w_i f(t_i) g(t_i). The default grid is uniform,
//! t_i = i/m with w_i = 1/m; a scalar time series is the m = 1 grid with
//! weight 1. Every statistic downstream is a function of the n x n Gram
//! matrix G[s, t] = ⟨u_s, u_t⟩, computed here once per sample.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Evaluation points and quadrature weights defining the discretized L² space.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl Grid {
    /// Uniform grid t_i = i/m with weights 1/m. `uniform(1)` is the scalar
    /// embedding: one point t = 1 with weight 1.
    pub fn uniform(m: usize) -> Arc<Self> {
        assert!(m >= 1, "grid needs at least one point");
        let mf = m as f64;
        Arc::new(Self {
            points: (1..=m).map(|i| i as f64 / mf).collect(),
            weights: vec![1.0 / mf; m],
        })
    }

    /// Grid with explicit points and weights; points must be strictly
    /// increasing in (0, 1] and weights positive.
    pub fn with_weights(points: Vec<f64>, weights: Vec<f64>) -> Result<Arc<Self>> {
        if points.is_empty() {
            return Err(Error::InvalidGrid("no points".into()));
        }
        if points.len() != weights.len() {
            return Err(Error::InvalidGrid(format!(
                "{} points but {} weights",
                points.len(),
                weights.len()
            )));
        }
        for (i, &t) in points.iter().enumerate() {
            if !(t > 0.0 && t <= 1.0) || !t.is_finite() {
                return Err(Error::InvalidGrid(format!(
                    "point {i} = {t} outside (0, 1]"
                )));
            }
            if i > 0 && t <= points[i - 1] {
                return Err(Error::InvalidGrid(format!(
                    "points not strictly increasing at {i}"
                )));
            }
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidGrid(format!("nonpositive weight {w}")));
        }
        Ok(Arc::new(Self { points, weights }))
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// One curve: values at the grid points.
#[derive(Debug, Clone, PartialEq)]
pub struct GridCurve {
    values: Vec<f64>,
    grid: Arc<Grid>,
}

impl GridCurve {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "curve has {} values on a {}-point grid",
                values.len(),
                grid.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid(format!("non-finite curve value {v}")));
        }
        Ok(Self { values, grid })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }
}

fn same_grid(a: &Arc<Grid>, b: &Arc<Grid>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// Quadrature inner product ⟨f, g⟩ = Σ_i w_i f(t_i) g(t_i).
pub fn inner_product(f: &GridCurve, g: &GridCurve) -> Result<f64> {
    if !same_grid(&f.grid, &g.grid) {
        return Err(Error::GridMismatch(
            "inner product across different grids".into(),
        ));
    }
    let w = f.grid.weights();
    Ok(f.values
        .iter()
        .zip(&g.values)
        .zip(w)
        .map(|((a, b), w)| w * a * b)
        .sum())
}

/// A sample of n curves on one shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalSample {
    curves: Vec<GridCurve>,
}

impl FunctionalSample {
    pub fn new(curves: Vec<GridCurve>) -> Result<Self> {
        if curves.is_empty() {
            return Err(Error::InsufficientData { needed: 1, got: 0 });
        }
        let g0 = curves[0].grid.clone();
        if curves.iter().any(|c| !same_grid(&c.grid, &g0)) {
            return Err(Error::GridMismatch(
                "sample curves on different grids".into(),
            ));
        }
        Ok(Self { curves })
    }

    /// Build a sample from per-curve value rows on the given grid.
    pub fn from_rows(grid: Arc<Grid>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let curves = rows
            .into_iter()
            .map(|v| GridCurve::new(grid.clone(), v))
            .collect::<Result<Vec<_>>>()?;
        Self::new(curves)
    }

    pub fn n(&self) -> usize {
        self.curves.len()
    }

    pub fn m(&self) -> usize {
        self.grid().len()
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.curves[0].grid
    }

    pub fn curves(&self) -> &[GridCurve] {
        &self.curves
    }
}

/// Pairwise inner products G[s, t] = ⟨u_s, u_t⟩; symmetric positive
/// semidefinite, and the sole input to all lag statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    mat: DMatrix<f64>,
}

impl GramMatrix {
    pub fn n(&self) -> usize {
        self.mat.nrows()
    }

    /// Entry G[s, t] with zero-based indices.
    pub fn entry(&self, s: usize, t: usize) -> f64 {
        self.mat[(s, t)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }
}

/// Gram matrix of a sample: one n x m by m x n product with the quadrature
/// weights folded into one factor, then symmetrized to kill rounding skew.
pub fn gram(sample: &FunctionalSample) -> GramMatrix {
    let n = sample.n();
    let m = sample.m();
    let w = sample.grid().weights();
    let u = DMatrix::from_fn(n, m, |i, j| sample.curves[i].values[j]);
    let mut uw = u.clone();
    for (j, mut col) in uw.column_iter_mut().enumerate() {
        col *= w[j];
    }
    let mut g = uw * u.transpose();
    for s in 0..n {
        for t in (s + 1)..n {
            let avg = 0.5 * (g[(s, t)] + g[(t, s)]);
            g[(s, t)] = avg;
            g[(t, s)] = avg;
        }
    }
    GramMatrix { mat: g }
}

/// Subtract the pointwise sample mean curve from every curve.
pub fn center(sample: &FunctionalSample) -> FunctionalSample {
    let n = sample.n() as f64;
    let m = sample.m();
    let mut mean = vec![0.0; m];
    for c in &sample.curves {
        for (acc, v) in mean.iter_mut().zip(&c.values) {
            *acc += v;
        }
    }
    for acc in &mut mean {
        *acc /= n;
    }
    let curves = sample
        .curves
        .iter()
        .map(|c| GridCurve {
            values: c.values.iter().zip(&mean).map(|(v, mu)| v - mu).collect(),
            grid: c.grid.clone(),
        })
        .collect();
    FunctionalSample { curves }
}

/// First differences Y_i = X_{i+1} - X_i, yielding n - 1 curves.
pub fn difference(sample: &FunctionalSample) -> Result<FunctionalSample> {
    if sample.n() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: sample.n(),
        });
    }
    let curves = sample
        .curves
        .windows(2)
        .map(|pair| GridCurve {
            values: pair[1]
                .values
                .iter()
                .zip(&pair[0].values)
                .map(|(b, a)| b - a)
                .collect(),
            grid: pair[0].grid.clone(),
        })
        .collect();
    Ok(FunctionalSample { curves })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn curve(grid: &Arc<Grid>, values: Vec<f64>) -> GridCurve {
        GridCurve::new(grid.clone(), values).unwrap()
    }

    #[test]
    fn inner_product_of_constants_is_one() {
        let g = Grid::uniform(100);
        let one = curve(&g, vec![1.0; 100]);
        assert_abs_diff_eq!(inner_product(&one, &one).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn inner_product_linear_times_one() {
        // f(t) = t, g = 1 on t_i = i/m: Σ (1/m)(i/m) = (m+1)/(2m).
        let m = 100;
        let g = Grid::uniform(m);
        let f = curve(&g, g.points().to_vec());
        let one = curve(&g, vec![1.0; m]);
        assert_relative_eq!(
            inner_product(&f, &one).unwrap(),
            0.505,
            max_relative = 1e-12
        );
    }

    #[test]
    fn inner_product_linear_squared() {
        // f = g = t: Σ (1/m)(i/m)² = (m+1)(2m+1)/(6m²).
        let m = 100;
        let g = Grid::uniform(m);
        let f = curve(&g, g.points().to_vec());
        let expect = (m as f64 + 1.0) * (2.0 * m as f64 + 1.0) / (6.0 * (m as f64).powi(2));
        assert_relative_eq!(inner_product(&f, &f).unwrap(), expect, max_relative = 1e-12);
        assert_relative_eq!(expect, 0.33835, max_relative = 1e-4);
    }

    #[test]
    fn inner_product_rejects_mismatched_grids() {
        let f = curve(&Grid::uniform(4), vec![1.0; 4]);
        let h = curve(&Grid::uniform(5), vec![1.0; 5]);
        assert!(matches!(inner_product(&f, &h), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn quadrature_converges_at_rate_one_over_m() {
        // ∫ t² dt = 1/3; the right-endpoint rule errs by about 1/(2m).
        let mut errs = Vec::new();
        for m in [10usize, 100, 1000] {
            let g = Grid::uniform(m);
            let f = curve(&g, g.points().to_vec());
            errs.push((inner_product(&f, &f).unwrap() - 1.0 / 3.0).abs());
        }
        assert!(errs[0] / errs[1] > 5.0 && errs[0] / errs[1] < 20.0);
        assert!(errs[1] / errs[2] > 5.0 && errs[1] / errs[2] < 20.0);
    }

    #[test]
    fn gram_single_constant_curve() {
        let g = Grid::uniform(7);
        let s = FunctionalSample::new(vec![curve(&g, vec![1.0; 7])]).unwrap();
        let gm = gram(&s);
        assert_eq!(gm.n(), 1);
        assert_abs_diff_eq!(gm.entry(0, 0), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn gram_scalar_hand_example() {
        let g = Grid::uniform(1);
        let s = FunctionalSample::from_rows(g, vec![vec![1.0], vec![-1.0], vec![2.0]]).unwrap();
        let gm = gram(&s);
        let expect = [[1.0, -1.0, 2.0], [-1.0, 1.0, -2.0], [2.0, -2.0, 4.0]];
        for (s_, row) in expect.iter().enumerate() {
            for (t, want) in row.iter().enumerate() {
                assert_abs_diff_eq!(gm.entry(s_, t), *want, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn gram_matches_brute_force_inner_products() {
        let mut rng = crate::dgp::RngStream::from_parts(42, 0);
        for _ in 0..20 {
            let n = 2 + (rng.next_normal().abs() * 4.0) as usize;
            let m = 1 + (rng.next_normal().abs() * 3.0) as usize;
            let g = Grid::uniform(m);
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..m).map(|_| rng.next_normal()).collect())
                .collect();
            let s = FunctionalSample::from_rows(g, rows).unwrap();
            let gm = gram(&s);
            for a in 0..n {
                for b in 0..n {
                    let direct = inner_product(&s.curves()[a], &s.curves()[b]).unwrap();
                    assert_abs_diff_eq!(gm.entry(a, b), direct, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn gram_is_positive_semidefinite() {
        let mut rng = crate::dgp::RngStream::from_parts(7, 0);
        for _ in 0..10 {
            let g = Grid::uniform(5);
            let rows: Vec<Vec<f64>> = (0..8)
                .map(|_| (0..5).map(|_| rng.next_normal()).collect())
                .collect();
            let s = FunctionalSample::from_rows(g, rows).unwrap();
            let eig = gram(&s).matrix().clone().symmetric_eigen();
            let max = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
            let min = eig
                .eigenvalues
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min);
            assert!(min >= -1e-8 * max, "eigenvalue {min} below -1e-8 * {max}");
        }
    }

    #[test]
    fn center_leaves_mean_zero_sample_alone() {
        let g = Grid::uniform(3);
        let s = FunctionalSample::from_rows(g, vec![vec![1.0, 2.0, -1.0], vec![-1.0, -2.0, 1.0]])
            .unwrap();
        let c = center(&s);
        for (a, b) in c.curves().iter().zip(s.curves()) {
            for (x, y) in a.values().iter().zip(b.values()) {
                assert_abs_diff_eq!(x, y, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn center_shifts_zero_and_double() {
        // {0, 2c} -> {-c, c}
        let g = Grid::uniform(2);
        let s = FunctionalSample::from_rows(g, vec![vec![0.0, 0.0], vec![2.0, 4.0]]).unwrap();
        let c = center(&s);
        assert_eq!(c.curves()[0].values(), &[-1.0, -2.0]);
        assert_eq!(c.curves()[1].values(), &[1.0, 2.0]);
    }

    #[test]
    fn center_output_mean_is_zero() {
        let mut rng = crate::dgp::RngStream::from_parts(3, 1);
        let g = Grid::uniform(6);
        let rows: Vec<Vec<f64>> = (0..9)
            .map(|_| (0..6).map(|_| rng.next_normal()).collect())
            .collect();
        let c = center(&FunctionalSample::from_rows(g, rows).unwrap());
        for j in 0..6 {
            let mean: f64 = c.curves().iter().map(|cv| cv.values()[j]).sum::<f64>() / 9.0;
            assert_abs_diff_eq!(mean, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn difference_of_constant_sample_is_zero() {
        let g = Grid::uniform(3);
        let s = FunctionalSample::from_rows(g, vec![vec![2.0, 1.0, 0.5]; 4]).unwrap();
        let d = difference(&s).unwrap();
        assert_eq!(d.n(), 3);
        assert!(d
            .curves()
            .iter()
            .all(|c| c.values().iter().all(|v| *v == 0.0)));
    }

    #[test]
    fn difference_of_ramp_is_ones() {
        let g = Grid::uniform(1);
        let s = FunctionalSample::from_rows(g, (1..=5).map(|i| vec![i as f64]).collect()).unwrap();
        let d = difference(&s).unwrap();
        assert!(d.curves().iter().all(|c| c.values() == [1.0]));
    }

    #[test]
    fn difference_telescopes_back() {
        let g = Grid::uniform(2);
        let rows = vec![vec![1.0, 0.0], vec![2.5, -1.0], vec![0.5, 3.0]];
        let s = FunctionalSample::from_rows(g.clone(), rows.clone()).unwrap();
        let d = difference(&s).unwrap();
        let mut acc = rows[0].clone();
        for (i, dc) in d.curves().iter().enumerate() {
            for (a, dv) in acc.iter_mut().zip(dc.values()) {
                *a += dv;
            }
            for (a, orig) in acc.iter().zip(&rows[i + 1]) {
                assert_abs_diff_eq!(a, orig, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn difference_needs_two_curves() {
        let g = Grid::uniform(2);
        let s = FunctionalSample::from_rows(g, vec![vec![1.0, 2.0]]).unwrap();
        assert!(matches!(
            difference(&s),
            Err(Error::InsufficientData { needed: 2, got: 1 })
        ));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn cauchy_schwarz(
                fv in proptest::collection::vec(-1e3f64..1e3, 6),
                gv in proptest::collection::vec(-1e3f64..1e3, 6),
            ) {
                let g = Grid::uniform(6);
                let f = GridCurve::new(g.clone(), fv).unwrap();
                let h = GridCurve::new(g, gv).unwrap();
                let fg = inner_product(&f, &h).unwrap();
                let ff = inner_product(&f, &f).unwrap();
                let hh = inner_product(&h, &h).unwrap();
                prop_assert!(fg.abs() <= (ff * hh).sqrt() * (1.0 + 1e-12));
            }

            #[test]
            fn inner_product_is_symmetric_and_bilinear(
                fv in proptest::collection::vec(-1e2f64..1e2, 4),
                gv in proptest::collection::vec(-1e2f64..1e2, 4),
                a in -10.0f64..10.0,
            ) {
                let g = Grid::uniform(4);
                let f = GridCurve::new(g.clone(), fv.clone()).unwrap();
                let h = GridCurve::new(g.clone(), gv).unwrap();
                let fa = GridCurve::new(g, fv.iter().map(|v| a * v).collect()).unwrap();
                let fg = inner_product(&f, &h).unwrap();
                let gf = inner_product(&h, &f).unwrap();
                prop_assert!((fg - gf).abs() <= 1e-10 * (1.0 + fg.abs()));
                let scaled = inner_product(&fa, &h).unwrap();
                prop_assert!((scaled - a * fg).abs() <= 1e-9 * (1.0 + (a * fg).abs()));
            }
        }
    }
}
