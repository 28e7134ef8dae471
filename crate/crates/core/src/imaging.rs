//! Active-array imaging under mutual coupling.
//!
//! A noise-free snapshot of co-located transceivers is `X = M A G A^T M^T s`
//! with coupling matrix `M`, steering matrix `A`, diagonal reflectivities
//! `G`, and waveform `s`. Without coupling, entry `(n, m)` depends on the
//! element positions only through `d_n + d_m` — the sum co-array — which is
//! what lets a sparse array synthesize the point spread function of a filled
//! one. Beamforming applies a desired co-array taper (a 2-D Dolph-Chebyshev
//! window) as a short sum of rank-1 Tx/Rx weightings obtained from an SVD of
//! the pair-weight matrix, keeping enough components to capture a prescribed
//! fraction of the taper energy.
//!
//! Coupling follows an inverse-distance model `M_nm = c1 e^{j phi l} / l`
//! with unit diagonal, and the Monte-Carlo study draws the coupling phase
//! uniformly per trial from seeded counter-mode streams, so results are
//! reproducible and independent of how trials are scheduled.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand_core::{RngCore, SeedableRng};

use crate::configurations::ArrayFamily;
use crate::error::{Error, Result};
use crate::geometry::{sum_coarray, ElementSet, GridPoint};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use std::f64::consts::PI;

fn cexp(theta: f64) -> Complex64 {
    Complex64::new(theta.cos(), theta.sin())
}

/// A far-field point target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Target {
    /// Azimuth in radians, `[-pi, pi]`.
    pub azimuth: f64,
    /// Elevation in radians.
    pub elevation: f64,
    pub reflectivity: Complex64,
}

impl Target {
    pub fn new(azimuth: f64, elevation: f64, reflectivity: Complex64) -> Self {
        Self {
            azimuth,
            elevation,
            reflectivity,
        }
    }

    /// Direction cosines `(sin(az) sin(el), cos(az) sin(el))`; always inside
    /// the unit disk.
    pub fn direction(&self) -> (f64, f64) {
        let se = self.elevation.sin();
        (self.azimuth.sin() * se, self.azimuth.cos() * se)
    }
}

/// The imaged scene: targets plus the transmitted waveform.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    targets: Vec<Target>,
    waveform: Complex64,
}

impl Scene {
    pub fn new(targets: Vec<Target>, waveform: Complex64) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::InvalidScene("no targets".into()));
        }
        if waveform == Complex64::new(0.0, 0.0) {
            return Err(Error::InvalidScene("zero waveform".into()));
        }
        Ok(Self { targets, waveform })
    }

    /// Unit-reflectivity targets on the cross product of the given azimuth
    /// and elevation lists, azimuth-major.
    pub fn angular_grid(azimuths: &[f64], elevations: &[f64]) -> Result<Self> {
        let one = Complex64::new(1.0, 0.0);
        let targets: Vec<Target> = azimuths
            .iter()
            .flat_map(|&az| elevations.iter().map(move |&el| Target::new(az, el, one)))
            .collect();
        Self::new(targets, one)
    }

    /// The 16-target demo scene: azimuths `{-3,-1,1,3} pi/10` crossed with
    /// elevations `{1,2,3,4} pi/5`, unit reflectivity, unit waveform.
    pub fn demo() -> Self {
        let az: Vec<f64> = [-3.0, -1.0, 1.0, 3.0]
            .iter()
            .map(|k| k * PI / 10.0)
            .collect();
        let el: Vec<f64> = [1.0, 2.0, 3.0, 4.0].iter().map(|k| k * PI / 5.0).collect();
        Self::angular_grid(&az, &el).expect("demo scene is valid")
    }

    pub fn targets(&self) -> &[Target] {
        &self.targets
    }

    pub fn waveform(&self) -> Complex64 {
        self.waveform
    }

    pub fn directions(&self) -> Vec<(f64, f64)> {
        self.targets.iter().map(|t| t.direction()).collect()
    }
}

/// Inverse-distance mutual coupling model. Distances are measured in unit
/// spacings (half wavelengths); `c1 = 0` yields the identity matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingSpec {
    pub c1: f64,
    pub phase: f64,
}

/// Uniform scan grid in direction-cosine space `[-1, 1]^2`. Rows index the
/// first cosine (azimuth axis), columns the second (elevation axis).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScanGrid {
    n_az: usize,
    n_el: usize,
}

impl ScanGrid {
    pub fn new(n_az: usize, n_el: usize) -> Result<Self> {
        if n_az == 0 || n_el == 0 {
            return Err(Error::DimensionMismatch("empty scan grid".into()));
        }
        Ok(Self { n_az, n_el })
    }

    pub fn square(n: usize) -> Result<Self> {
        Self::new(n, n)
    }

    pub fn n_az(&self) -> usize {
        self.n_az
    }

    pub fn n_el(&self) -> usize {
        self.n_el
    }

    pub fn pixel_count(&self) -> usize {
        self.n_az * self.n_el
    }

    fn coord(i: usize, n: usize) -> f64 {
        if n == 1 {
            0.0
        } else {
            -1.0 + 2.0 * i as f64 / (n - 1) as f64
        }
    }

    pub fn vx(&self, i: usize) -> f64 {
        Self::coord(i, self.n_az)
    }

    pub fn vy(&self, j: usize) -> f64 {
        Self::coord(j, self.n_el)
    }
}

/// Steering matrix: `A[(n, k)] = exp(j pi v_k . d_n)` with positions on the
/// half-wavelength grid. All entries have unit modulus.
pub fn steering_matrix(d: &ElementSet, directions: &[(f64, f64)]) -> DMatrix<Complex64> {
    let n = d.len();
    let k = directions.len();
    DMatrix::from_fn(n, k, |row, col| {
        let p = d.elements()[row];
        let (vx, vy) = directions[col];
        cexp(PI * (vx * p.x as f64 + vy * p.y as f64))
    })
}

/// Mutual coupling matrix: unit diagonal, `c1 e^{j phase l} / l` off the
/// diagonal with `l` the inter-element distance in unit spacings. Symmetric
/// by reciprocity.
pub fn coupling_matrix(d: &ElementSet, spec: &CouplingSpec) -> DMatrix<Complex64> {
    let n = d.len();
    DMatrix::from_fn(n, n, |r, c| {
        if r == c {
            Complex64::new(1.0, 0.0)
        } else {
            let l = (((d.elements()[r] - d.elements()[c]).norm_sq()) as f64).sqrt();
            cexp(spec.phase * l) * (spec.c1 / l)
        }
    })
}

/// Noise-free snapshot `X = (M A) G (M A)^T s` for reciprocal elements.
pub fn snapshot(
    d: &ElementSet,
    scene: &Scene,
    m: &DMatrix<Complex64>,
) -> Result<DMatrix<Complex64>> {
    let n = d.len();
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "coupling matrix is {}x{}, array has {} elements",
            m.nrows(),
            m.ncols(),
            n
        )));
    }
    let a = steering_matrix(d, &scene.directions());
    let b = m * a;
    let gamma = DMatrix::from_diagonal(&DVector::from_iterator(
        scene.targets().len(),
        scene.targets().iter().map(|t| t.reflectivity),
    ));
    Ok(&b * gamma * b.transpose() * scene.waveform())
}

fn chebyshev_poly(order: u32, x: f64) -> f64 {
    if x.abs() <= 1.0 {
        (order as f64 * x.acos()).cos()
    } else if x > 1.0 {
        (order as f64 * x.acosh()).cosh()
    } else {
        let sign = if order % 2 == 0 { 1.0 } else { -1.0 };
        sign * (order as f64 * (-x).acosh()).cosh()
    }
}

/// Dolph-Chebyshev window of length `len` with equiripple sidelobes
/// `sidelobe_db` below the mainlobe (attenuation given as a positive
/// number). Peak-normalized with the maximum at the center.
pub fn chebyshev_window(len: usize, sidelobe_db: f64) -> Vec<f64> {
    if len <= 1 {
        return vec![1.0; len];
    }
    let order = (len - 1) as u32;
    let nf = len as f64;
    let r = 10f64.powf(sidelobe_db / 20.0);
    let x0 = (r.acosh() / order as f64).cosh();

    // frequency samples of the window are Chebyshev polynomial values
    let freq: Vec<f64> = (0..len)
        .map(|k| chebyshev_poly(order, x0 * (PI * k as f64 / nf).cos()))
        .collect();

    let mut w = vec![0.0; len];
    if len % 2 == 1 {
        let half = (len - 1) / 2;
        // p[t] = sum_k F[k] cos(2 pi k t / len); taps mirror around center
        let p: Vec<f64> = (0..=half)
            .map(|t| {
                freq.iter()
                    .enumerate()
                    .map(|(k, &f)| f * (2.0 * PI * k as f64 * t as f64 / nf).cos())
                    .sum()
            })
            .collect();
        for (j, wj) in w.iter_mut().enumerate() {
            *wj = p[(j as i64 - half as i64).unsigned_abs() as usize];
        }
    } else {
        // even length needs a half-sample phase before the transform
        let n_half = len / 2 + 1;
        let q: Vec<f64> = (0..n_half)
            .map(|i| {
                freq.iter()
                    .enumerate()
                    .map(|(k, &f)| f * (PI * k as f64 * (1.0 - 2.0 * i as f64) / nf).cos())
                    .sum()
            })
            .collect();
        for (j, wj) in w.iter_mut().enumerate() {
            *wj = if j < n_half - 1 {
                q[n_half - 1 - j]
            } else {
                q[j + 2 - n_half]
            };
        }
    }

    let peak = w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    for v in &mut w {
        *v /= peak;
    }
    w
}

/// Separable 2-D Dolph-Chebyshev taper over the sum co-array rectangle: the
/// outer product of windows of lengths `2lx + 1` and `2ly + 1`,
/// peak-normalized to 1 at the center.
pub fn chebyshev_taper_2d(lx: i64, ly: i64, sidelobe_db: f64) -> Result<DMatrix<f64>> {
    if sidelobe_db <= 0.0 {
        return Err(Error::DomainViolation(format!(
            "sidelobe attenuation must be positive, got {sidelobe_db}"
        )));
    }
    if lx < 0 || ly < 0 {
        return Err(Error::DomainViolation("negative aperture".into()));
    }
    let wx = chebyshev_window((2 * lx + 1) as usize, sidelobe_db);
    let wy = chebyshev_window((2 * ly + 1) as usize, sidelobe_db);
    Ok(DMatrix::from_fn(wx.len(), wy.len(), |i, j| wx[i] * wy[j]))
}

/// Pair-weight matrix realizing a desired co-array taper: every ordered pair
/// mapping to co-array point `c` receives `taper(c) / multiplicity(c)`, so
/// the aggregated weight over each co-array point equals the taper exactly.
pub fn coarray_weight_matrix(d: &ElementSet, taper: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (lx, ly) = (d.lx(), d.ly());
    let (tw, th) = ((2 * lx + 1) as usize, (2 * ly + 1) as usize);
    if taper.nrows() != tw || taper.ncols() != th {
        return Err(Error::DimensionMismatch(format!(
            "taper is {}x{}, sum co-array rectangle is {tw}x{th}",
            taper.nrows(),
            taper.ncols()
        )));
    }
    let coarray = sum_coarray(d);
    for x in 0..tw {
        for y in 0..th {
            let p = GridPoint::new(x as i64, y as i64);
            if taper[(x, y)] != 0.0 && coarray.weight(p) == 0 {
                return Err(Error::TaperExceedsCoarray { point: p });
            }
        }
    }
    let n = d.len();
    Ok(DMatrix::from_fn(n, n, |r, c| {
        let p = d.elements()[r] + d.elements()[c];
        taper[(p.x as usize, p.y as usize)] / coarray.weight(p) as f64
    }))
}

/// One rank-1 Tx/Rx component of the image-addition weighting.
#[derive(Debug, Clone)]
pub struct SvdComponent {
    pub singular_value: f64,
    pub tx: DVector<Complex64>,
    pub rx: DVector<Complex64>,
}

/// Truncated SVD of a pair-weight matrix: the smallest number of rank-1
/// components whose squared singular values reach the requested energy
/// fraction.
#[derive(Debug, Clone)]
pub struct ImageAdditionWeights {
    components: Vec<SvdComponent>,
    energy_threshold: f64,
    retained_energy: f64,
}

impl ImageAdditionWeights {
    /// Number of retained components `Q`.
    pub fn q(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[SvdComponent] {
        &self.components
    }

    pub fn energy_threshold(&self) -> f64 {
        self.energy_threshold
    }

    /// Fraction of squared-singular-value mass retained; at least the
    /// threshold by construction.
    pub fn retained_energy(&self) -> f64 {
        self.retained_energy
    }

    /// Low-rank reconstruction `sum_q rx_q tx_q^T` of the weight matrix.
    pub fn reconstruct(&self) -> DMatrix<Complex64> {
        let n = self.components[0].rx.len();
        let mut w = DMatrix::zeros(n, n);
        for c in &self.components {
            w += &c.rx * c.tx.transpose();
        }
        w
    }
}

/// Splits a pair-weight matrix into rank-1 Tx/Rx components by SVD, keeping
/// the smallest `Q` whose energy fraction meets `energy_threshold`.
pub fn image_addition_weights(
    w: &DMatrix<f64>,
    energy_threshold: f64,
) -> Result<ImageAdditionWeights> {
    if !(energy_threshold > 0.0 && energy_threshold <= 1.0) {
        return Err(Error::ThresholdOutOfRange(energy_threshold));
    }
    let svd = w.clone().svd(true, true);
    let u = svd.u.expect("svd computed with u");
    let v_t = svd.v_t.expect("svd computed with v_t");
    let sigma = svd.singular_values;

    let total: f64 = sigma.iter().map(|s| s * s).sum();
    if total == 0.0 {
        return Err(Error::DomainViolation("zero weight matrix".into()));
    }
    let mut kept = 0usize;
    let mut partial = 0.0;
    for s in sigma.iter() {
        partial += s * s;
        kept += 1;
        if partial / total >= energy_threshold {
            break;
        }
    }

    let to_complex = |x: f64| Complex64::new(x, 0.0);
    let components: Vec<SvdComponent> = (0..kept)
        .map(|q| {
            let rx = DVector::from_iterator(u.nrows(), u.column(q).iter().cloned().map(to_complex));
            let tx = DVector::from_iterator(
                v_t.ncols(),
                v_t.row(q).iter().cloned().map(|x| to_complex(sigma[q] * x)),
            );
            SvdComponent {
                singular_value: sigma[q],
                tx,
                rx,
            }
        })
        .collect();

    Ok(ImageAdditionWeights {
        components,
        energy_threshold,
        retained_energy: partial / total,
    })
}

fn check_beamform_dims(
    x: &DMatrix<Complex64>,
    d: &ElementSet,
    weights: &ImageAdditionWeights,
) -> Result<()> {
    let n = d.len();
    if x.nrows() != n || x.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "snapshot is {}x{}, array has {n} elements",
            x.nrows(),
            x.ncols()
        )));
    }
    if weights.components[0].rx.len() != n {
        return Err(Error::DimensionMismatch(
            "weights were built for a different array".into(),
        ));
    }
    Ok(())
}

/// Aggregates the weighted snapshot onto the sum co-array rectangle:
/// `agg(c) = sum over pairs with d_n + d_m = c of W_nm X_nm`.
fn coarray_aggregate(
    x: &DMatrix<Complex64>,
    d: &ElementSet,
    w: &DMatrix<Complex64>,
) -> DMatrix<Complex64> {
    let mut agg = DMatrix::zeros((2 * d.lx() + 1) as usize, (2 * d.ly() + 1) as usize);
    let n = d.len();
    for r in 0..n {
        for c in 0..n {
            let p = d.elements()[r] + d.elements()[c];
            agg[(p.x as usize, p.y as usize)] += w[(r, c)] * x[(r, c)];
        }
    }
    agg
}

/// Stage 1 of the separable pixel transform: collapse the elevation axis of
/// the aggregate for every scan column.
fn elevation_stage(agg: &DMatrix<Complex64>, grid: &ScanGrid) -> Vec<Vec<Complex64>> {
    let (w, h) = (agg.nrows(), agg.ncols());
    (0..grid.n_el())
        .map(|j| {
            let vy = grid.vy(j);
            (0..w)
                .map(|cx| {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for cy in 0..h {
                        acc += agg[(cx, cy)] * cexp(-PI * vy * cy as f64);
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

fn azimuth_row(stage: &[Vec<Complex64>], grid: &ScanGrid, w: usize, i: usize) -> Vec<Complex64> {
    let vx = grid.vx(i);
    let phases: Vec<Complex64> = (0..w).map(|cx| cexp(-PI * vx * cx as f64)).collect();
    (0..grid.n_el())
        .map(|j| {
            let col = &stage[j];
            let mut acc = Complex64::new(0.0, 0.0);
            for cx in 0..w {
                acc += phases[cx] * col[cx];
            }
            acc
        })
        .collect()
}

fn rows_to_matrix(rows: Vec<Vec<Complex64>>, grid: &ScanGrid) -> DMatrix<Complex64> {
    DMatrix::from_row_iterator(grid.n_az(), grid.n_el(), rows.into_iter().flatten())
}

/// Beamforms one snapshot into an image over the scan grid.
///
/// Evaluates the image-addition sum in the co-array domain: the truncated
/// weight reconstruction multiplies the snapshot entrywise, pairs aggregate
/// onto their sum co-array points, and each pixel applies the separable
/// phase transform. Algebraically identical to summing the rank-1 component
/// images, but linear in the co-array size per pixel.
pub fn beamform_image(
    x: &DMatrix<Complex64>,
    d: &ElementSet,
    weights: &ImageAdditionWeights,
    grid: &ScanGrid,
) -> Result<DMatrix<Complex64>> {
    check_beamform_dims(x, d, weights)?;
    let w = weights.reconstruct();
    let agg = coarray_aggregate(x, d, &w);
    let stage = elevation_stage(&agg, grid);
    let width = agg.nrows();
    #[cfg(feature = "parallel")]
    let rows: Vec<Vec<Complex64>> = (0..grid.n_az())
        .into_par_iter()
        .map(|i| azimuth_row(&stage, grid, width, i))
        .collect();
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<Vec<Complex64>> = (0..grid.n_az())
        .map(|i| azimuth_row(&stage, grid, width, i))
        .collect();
    Ok(rows_to_matrix(rows, grid))
}

/// Single-threaded [`beamform_image`]; identical output.
pub fn beamform_image_seq(
    x: &DMatrix<Complex64>,
    d: &ElementSet,
    weights: &ImageAdditionWeights,
    grid: &ScanGrid,
) -> Result<DMatrix<Complex64>> {
    check_beamform_dims(x, d, weights)?;
    let w = weights.reconstruct();
    let agg = coarray_aggregate(x, d, &w);
    let stage = elevation_stage(&agg, grid);
    let width = agg.nrows();
    let rows: Vec<Vec<Complex64>> = (0..grid.n_az())
        .map(|i| azimuth_row(&stage, grid, width, i))
        .collect();
    Ok(rows_to_matrix(rows, grid))
}

/// Literal per-component evaluation `Y_ij = sum_q (rx_q o a*)^T X (tx_q o a*)`,
/// the slow reference for the fast co-array path.
pub fn beamform_image_direct(
    x: &DMatrix<Complex64>,
    d: &ElementSet,
    weights: &ImageAdditionWeights,
    grid: &ScanGrid,
) -> Result<DMatrix<Complex64>> {
    check_beamform_dims(x, d, weights)?;
    let n = d.len();
    let mut img = DMatrix::zeros(grid.n_az(), grid.n_el());
    for i in 0..grid.n_az() {
        for j in 0..grid.n_el() {
            let (vx, vy) = (grid.vx(i), grid.vy(j));
            let a_conj: DVector<Complex64> = DVector::from_iterator(
                n,
                d.elements()
                    .iter()
                    .map(|p| cexp(-PI * (vx * p.x as f64 + vy * p.y as f64))),
            );
            let mut acc = Complex64::new(0.0, 0.0);
            for comp in weights.components() {
                let rx_w: DVector<Complex64> = comp.rx.component_mul(&a_conj);
                let tx_w: DVector<Complex64> = comp.tx.component_mul(&a_conj);
                acc += (rx_w.transpose() * x * tx_w)[(0, 0)];
            }
            img[(i, j)] = acc;
        }
    }
    Ok(img)
}

/// The complex scalar minimizing `||y_d - alpha y||_F`.
pub fn optimal_scale(y: &DMatrix<Complex64>, y_d: &DMatrix<Complex64>) -> Result<Complex64> {
    if y.shape() != y_d.shape() {
        return Err(Error::DimensionMismatch(format!(
            "images are {:?} and {:?}",
            y.shape(),
            y_d.shape()
        )));
    }
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = 0.0f64;
    for (a, b) in y.iter().zip(y_d.iter()) {
        num += a.conj() * b;
        den += a.norm_sqr();
    }
    if den == 0.0 {
        return Err(Error::ZeroImage);
    }
    Ok(num / den)
}

/// Root-mean-square image error after optimal complex scaling:
/// `||y_d - alpha y||_F / sqrt(pixels)`.
pub fn image_rmse(y: &DMatrix<Complex64>, y_d: &DMatrix<Complex64>) -> Result<f64> {
    let alpha = optimal_scale(y, y_d)?;
    let mut sq = 0.0f64;
    for (a, b) in y.iter().zip(y_d.iter()) {
        sq += (b - alpha * a).norm_sqr();
    }
    Ok((sq / y.len() as f64).sqrt())
}

/// Which coupling-free image the RMSE is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReferenceMode {
    /// The same array's coupling-free image.
    #[default]
    SelfCouplingFree,
    /// The coupling-free image of the URA with the same aperture.
    UraCouplingFree,
}

/// Full parameter bundle for an imaging experiment.
#[derive(Debug, Clone)]
pub struct ImagingConfig {
    pub scene: Scene,
    pub grid: ScanGrid,
    /// Dolph-Chebyshev sidelobe attenuation in dB (positive).
    pub sidelobe_db: f64,
    /// SVD energy fraction to retain, in `(0, 1]`.
    pub energy_threshold: f64,
    /// Coupling magnitude.
    pub c1: f64,
    pub reference: ReferenceMode,
    /// Default Monte-Carlo trial count.
    pub trials: usize,
    /// Default Monte-Carlo seed.
    pub seed: u64,
}

impl Default for ImagingConfig {
    fn default() -> Self {
        Self {
            scene: Scene::demo(),
            grid: ScanGrid::square(201).expect("non-empty"),
            sidelobe_db: 40.0,
            energy_threshold: 0.9999,
            c1: 0.2,
            reference: ReferenceMode::SelfCouplingFree,
            trials: 100,
            seed: 0,
        }
    }
}

/// A prepared imaging experiment: array, taper weights, and the
/// coupling-free reference image, ready to evaluate coupled images at
/// arbitrary phases.
pub struct ImagingStudy {
    d: ElementSet,
    weights: ImageAdditionWeights,
    reference: DMatrix<Complex64>,
    reference_peak: f64,
    scene: Scene,
    grid: ScanGrid,
    c1: f64,
}

impl ImagingStudy {
    pub fn new(d: ElementSet, config: &ImagingConfig) -> Result<Self> {
        let weights = Self::weights_for(&d, config)?;
        let reference = match config.reference {
            ReferenceMode::SelfCouplingFree => {
                Self::coupling_free(&d, &weights, &config.scene, &config.grid)?
            }
            ReferenceMode::UraCouplingFree => {
                let ura = crate::configurations::make_ura(d.lx(), d.ly())?;
                let ura_weights = Self::weights_for(&ura, config)?;
                Self::coupling_free(&ura, &ura_weights, &config.scene, &config.grid)?
            }
        };
        let reference_peak = reference.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if reference_peak == 0.0 {
            return Err(Error::ZeroImage);
        }
        Ok(Self {
            d,
            weights,
            reference,
            reference_peak,
            scene: config.scene.clone(),
            grid: config.grid,
            c1: config.c1,
        })
    }

    fn weights_for(d: &ElementSet, config: &ImagingConfig) -> Result<ImageAdditionWeights> {
        let taper = chebyshev_taper_2d(d.lx(), d.ly(), config.sidelobe_db)?;
        let w = coarray_weight_matrix(d, &taper)?;
        image_addition_weights(&w, config.energy_threshold)
    }

    fn coupling_free(
        d: &ElementSet,
        weights: &ImageAdditionWeights,
        scene: &Scene,
        grid: &ScanGrid,
    ) -> Result<DMatrix<Complex64>> {
        let m = coupling_matrix(d, &CouplingSpec { c1: 0.0, phase: 0.0 });
        let x = snapshot(d, scene, &m)?;
        beamform_image(&x, d, weights, grid)
    }

    pub fn array(&self) -> &ElementSet {
        &self.d
    }

    pub fn weights(&self) -> &ImageAdditionWeights {
        &self.weights
    }

    /// The coupling-free reference image.
    pub fn reference(&self) -> &DMatrix<Complex64> {
        &self.reference
    }

    /// Peak magnitude of the reference image; the unit in which
    /// [`ImagingStudy::rmse_at_phase`] is expressed.
    pub fn reference_peak(&self) -> f64 {
        self.reference_peak
    }

    /// Coupled image at the given coupling phase.
    pub fn image_at_phase(&self, phase: f64) -> Result<DMatrix<Complex64>> {
        let m = coupling_matrix(&self.d, &CouplingSpec { c1: self.c1, phase });
        let x = snapshot(&self.d, &self.scene, &m)?;
        beamform_image(&x, &self.d, &self.weights, &self.grid)
    }

    /// RMSE of the coupled image against the reference, in units of the
    /// reference peak magnitude (so a peak-normalized image convention).
    pub fn rmse_at_phase(&self, phase: f64) -> Result<f64> {
        Ok(image_rmse(&self.image_at_phase(phase)?, &self.reference)? / self.reference_peak)
    }
}

/// The coupling phase for one Monte-Carlo trial: each trial reads its own
/// counter-mode stream of the seeded generator, so the value depends only on
/// `(seed, trial)` and never on scheduling.
pub fn trial_phase(seed: u64, trial: u64) -> f64 {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    let x = rng.next_u64() >> 11; // 53 uniform bits
    (x as f64 / (1u64 << 53) as f64) * 2.0 * PI
}

/// Monte-Carlo RMSE summary.
#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloResult {
    pub mean: f64,
    pub std_dev: f64,
    /// Per-trial RMSE, indexed by trial number.
    pub trials: Vec<f64>,
    pub seed: u64,
}

fn summarize(trials: Vec<f64>, seed: u64) -> MonteCarloResult {
    let n = trials.len();
    let mean = trials.iter().sum::<f64>() / n as f64;
    let std_dev = if n < 2 {
        0.0
    } else {
        (trials.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
    };
    MonteCarloResult {
        mean,
        std_dev,
        trials,
        seed,
    }
}

/// Runs `n_trials` imaging trials with uniformly random coupling phases and
/// returns the per-trial RMSE list plus sample mean and standard deviation.
pub fn monte_carlo_rmse(
    family: &ArrayFamily,
    config: &ImagingConfig,
    n_trials: usize,
    seed: u64,
) -> Result<MonteCarloResult> {
    if n_trials == 0 {
        return Err(Error::DomainViolation("need at least one trial".into()));
    }
    let study = ImagingStudy::new(family.generate()?, config)?;
    #[cfg(feature = "parallel")]
    let trials: Result<Vec<f64>> = (0..n_trials as u64)
        .into_par_iter()
        .map(|t| study.rmse_at_phase(trial_phase(seed, t)))
        .collect();
    #[cfg(not(feature = "parallel"))]
    let trials: Result<Vec<f64>> = (0..n_trials as u64)
        .map(|t| study.rmse_at_phase(trial_phase(seed, t)))
        .collect();
    Ok(summarize(trials?, seed))
}

/// Single-threaded [`monte_carlo_rmse`]; identical output.
pub fn monte_carlo_rmse_seq(
    family: &ArrayFamily,
    config: &ImagingConfig,
    n_trials: usize,
    seed: u64,
) -> Result<MonteCarloResult> {
    if n_trials == 0 {
        return Err(Error::DomainViolation("need at least one trial".into()));
    }
    let study = ImagingStudy::new(family.generate()?, config)?;
    let trials: Result<Vec<f64>> = (0..n_trials as u64)
        .map(|t| study.rmse_at_phase(trial_phase(seed, t)))
        .collect();
    Ok(summarize(trials?, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::configurations::{make_ba, make_cra, make_ura, ArrayKind};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn small_scene() -> Scene {
        Scene::new(
            vec![
                Target::new(0.3, 0.9, c(1.0, 0.0)),
                Target::new(-0.5, 1.2, c(0.7, 0.2)),
            ],
            c(1.0, 0.0),
        )
        .unwrap()
    }

    #[test]
    fn steering_boresight_is_all_ones() {
        let d = make_ba(2, 2).unwrap();
        let a = steering_matrix(&d, &[(0.0, 0.0)]);
        for v in a.iter() {
            assert_eq!(*v, c(1.0, 0.0));
        }
    }

    #[test]
    fn steering_two_elements_full_turn() {
        let d = ElementSet::new([GridPoint::new(0, 0), GridPoint::new(2, 0)], 2, 0).unwrap();
        let a = steering_matrix(&d, &[(1.0, 0.0)]);
        assert!((a[(0, 0)] - c(1.0, 0.0)).norm() < 1e-12);
        assert!((a[(1, 0)] - c(1.0, 0.0)).norm() < 1e-12); // phase 2 pi
    }

    #[test]
    fn steering_is_unit_modulus() {
        let d = make_cra(4, 4).unwrap();
        let a = steering_matrix(&d, &small_scene().directions());
        for v in a.iter() {
            assert!((v.norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn coupling_zero_is_identity() {
        let d = make_ba(3, 3).unwrap();
        let m = coupling_matrix(&d, &CouplingSpec { c1: 0.0, phase: 1.3 });
        for r in 0..d.len() {
            for cc in 0..d.len() {
                let expect = if r == cc { 1.0 } else { 0.0 };
                assert_eq!(m[(r, cc)].norm(), expect);
            }
        }
    }

    #[test]
    fn coupling_adjacent_magnitude_and_symmetry() {
        let d = ElementSet::new([GridPoint::new(0, 0), GridPoint::new(1, 0)], 1, 0).unwrap();
        let m = coupling_matrix(&d, &CouplingSpec { c1: 0.2, phase: 0.0 });
        assert!((m[(0, 1)] - c(0.2, 0.0)).norm() < 1e-15);
        assert_eq!(m[(0, 1)], m[(1, 0)]);
    }

    #[test]
    fn coupling_decays_with_distance() {
        let d = make_ura(3, 0).unwrap();
        let m = coupling_matrix(&d, &CouplingSpec { c1: 0.2, phase: 0.7 });
        assert!((m[(0, 1)].norm() - 0.2).abs() < 1e-14);
        assert!((m[(0, 2)].norm() - 0.1).abs() < 1e-14);
        assert!((m[(0, 3)].norm() - 0.2 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn snapshot_boresight_unit_target_is_all_ones() {
        let d = make_ba(2, 2).unwrap();
        // elevation 0 puts the target at v = (0, 0)
        let scene = Scene::new(vec![Target::new(0.0, 0.0, c(1.0, 0.0))], c(1.0, 0.0)).unwrap();
        let m = DMatrix::identity(d.len(), d.len());
        let x = snapshot(&d, &scene, &m).unwrap();
        for v in x.iter() {
            assert!((v - c(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn snapshot_is_symmetric_and_linear() {
        let d = make_cra(4, 4).unwrap();
        let m = coupling_matrix(&d, &CouplingSpec { c1: 0.2, phase: 2.1 });
        let s = small_scene();
        let x = snapshot(&d, &s, &m).unwrap();
        for r in 0..d.len() {
            for cc in 0..d.len() {
                assert!((x[(r, cc)] - x[(cc, r)]).norm() < 1e-12 * x[(r, cc)].norm().max(1.0));
            }
        }
        // superposition over targets
        let t = s.targets();
        let x1 = snapshot(&d, &Scene::new(vec![t[0]], s.waveform()).unwrap(), &m).unwrap();
        let x2 = snapshot(&d, &Scene::new(vec![t[1]], s.waveform()).unwrap(), &m).unwrap();
        assert!(((&x1 + &x2) - &x).norm() < 1e-10);
    }

    #[test]
    fn snapshot_entries_depend_only_on_coarray_point() {
        let d = make_ba(3, 3).unwrap();
        let scene = small_scene();
        let m = DMatrix::identity(d.len(), d.len());
        let x = snapshot(&d, &scene, &m).unwrap();
        let e = d.elements();
        for n in 0..e.len() {
            for mm in 0..e.len() {
                for p in 0..e.len() {
                    for q in 0..e.len() {
                        if e[n] + e[mm] == e[p] + e[q] {
                            let rel =
                                (x[(n, mm)] - x[(p, q)]).norm() / x[(n, mm)].norm().max(1e-30);
                            assert!(rel < 1e-12);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn chebyshev_degenerate_and_symmetry() {
        assert_eq!(chebyshev_window(1, 40.0), vec![1.0]);
        let w = chebyshev_window(25, 40.0);
        assert_eq!(w.len(), 25);
        let peak = w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!((peak - 1.0).abs() < 1e-12);
        assert!((w[12] - 1.0).abs() < 1e-12); // peak at center
        for i in 0..25 {
            assert!((w[i] - w[24 - i]).abs() < 1e-9, "tap {i}");
        }
        // even length: symmetric, positive peak
        let w = chebyshev_window(16, 30.0);
        for i in 0..16 {
            assert!((w[i] - w[15 - i]).abs() < 1e-9, "even tap {i}");
        }
    }

    #[test]
    fn chebyshev_sidelobes_at_prescribed_level() {
        let w = chebyshev_window(25, 40.0);
        // dense array factor; the mainlobe ends where the response first
        // drops well below the sidelobe ceiling
        let af = |psi: f64| -> f64 {
            let mut acc = c(0.0, 0.0);
            for (k, &wk) in w.iter().enumerate() {
                acc += c(wk, 0.0) * cexp(psi * k as f64);
            }
            acc.norm()
        };
        let peak = af(0.0);
        let mut worst: f64 = 0.0;
        let mut past_mainlobe = false;
        for s in 1..=4000 {
            let psi = PI * s as f64 / 4000.0;
            let v = af(psi) / peak;
            if !past_mainlobe {
                if v < 0.01 {
                    past_mainlobe = true;
                }
                continue;
            }
            worst = worst.max(v);
        }
        assert!(past_mainlobe);
        let worst_db = 20.0 * worst.log10();
        assert!(worst_db <= -39.9, "worst sidelobe {worst_db} dB");
    }

    #[test]
    fn taper_2d_shapes_and_flip_symmetry() {
        let t = chebyshev_taper_2d(0, 0, 40.0).unwrap();
        assert_eq!((t.nrows(), t.ncols()), (1, 1));
        assert_eq!(t[(0, 0)], 1.0);

        let t = chebyshev_taper_2d(3, 2, 40.0).unwrap();
        assert_eq!((t.nrows(), t.ncols()), (7, 5));
        for i in 0..7 {
            for j in 0..5 {
                assert!((t[(i, j)] - t[(6 - i, j)]).abs() < 1e-9);
                assert!((t[(i, j)] - t[(i, 4 - j)]).abs() < 1e-9);
            }
        }
        assert!(chebyshev_taper_2d(3, 2, -5.0).is_err());
    }

    #[test]
    fn weight_matrix_uniform_taper_is_inverse_multiplicity() {
        let d = make_ura(2, 2).unwrap();
        let taper = DMatrix::from_element(5, 5, 1.0);
        let w = coarray_weight_matrix(&d, &taper).unwrap();
        let co = sum_coarray(&d);
        for r in 0..d.len() {
            for cc in 0..d.len() {
                let p = d.elements()[r] + d.elements()[cc];
                assert_eq!(w[(r, cc)], 1.0 / co.weight(p) as f64);
                assert_eq!(w[(r, cc)], w[(cc, r)]);
            }
        }
    }

    #[test]
    fn weight_matrix_aggregates_back_to_taper() {
        let d = make_cra(6, 6).unwrap();
        let taper = chebyshev_taper_2d(6, 6, 40.0).unwrap();
        let w = coarray_weight_matrix(&d, &taper).unwrap();
        let mut agg: DMatrix<f64> = DMatrix::zeros(13, 13);
        for r in 0..d.len() {
            for cc in 0..d.len() {
                let p = d.elements()[r] + d.elements()[cc];
                agg[(p.x as usize, p.y as usize)] += w[(r, cc)];
            }
        }
        for i in 0..13 {
            for j in 0..13 {
                assert!(
                    (agg[(i, j)] - taper[(i, j)]).abs() < 1e-12,
                    "co-array point ({i},{j})"
                );
            }
        }
    }

    #[test]
    fn weight_matrix_rejects_taper_off_support() {
        // a non-contiguous pair cannot realize a full-rectangle taper
        let d = ElementSet::new([GridPoint::new(0, 0), GridPoint::new(2, 2)], 2, 2).unwrap();
        let taper = DMatrix::from_element(5, 5, 1.0);
        assert!(matches!(
            coarray_weight_matrix(&d, &taper),
            Err(Error::TaperExceedsCoarray { .. })
        ));
    }

    #[test]
    fn svd_rank_one_needs_single_component() {
        let a = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let b = DVector::from_vec(vec![0.5, -1.0, 2.0]);
        let w = &a * b.transpose();
        let iw = image_addition_weights(&w, 0.9999).unwrap();
        assert_eq!(iw.q(), 1);
        let rec = iw.reconstruct();
        for r in 0..3 {
            for cc in 0..3 {
                assert!((rec[(r, cc)].re - w[(r, cc)]).abs() < 1e-10);
                assert!(rec[(r, cc)].im.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn svd_threshold_one_reconstructs_exactly() {
        let d = make_ba(2, 2).unwrap();
        let taper = chebyshev_taper_2d(2, 2, 40.0).unwrap();
        let w = coarray_weight_matrix(&d, &taper).unwrap();
        let iw = image_addition_weights(&w, 1.0).unwrap();
        let rec = iw.reconstruct();
        let mut err = 0.0f64;
        let mut norm = 0.0f64;
        for r in 0..w.nrows() {
            for cc in 0..w.ncols() {
                err += (rec[(r, cc)].re - w[(r, cc)]).powi(2) + rec[(r, cc)].im.powi(2);
                norm += w[(r, cc)].powi(2);
            }
        }
        assert!((err / norm).sqrt() < 1e-12);
        assert!(iw.retained_energy() >= 1.0 - 1e-12);
        assert!(image_addition_weights(&w, 1.5).is_err());
        assert!(image_addition_weights(&w, 0.0).is_err());
    }

    #[test]
    fn truncation_keeps_requested_energy() {
        let d = make_cra(12, 12).unwrap();
        let taper = chebyshev_taper_2d(12, 12, 40.0).unwrap();
        let w = coarray_weight_matrix(&d, &taper).unwrap();
        let iw = image_addition_weights(&w, 0.9999).unwrap();
        assert!(iw.retained_energy() >= 0.9999);
        assert!(iw.q() <= d.len());
        // reconstruction error bounded by the discarded energy
        let rec = iw.reconstruct();
        let mut err = 0.0;
        let mut norm = 0.0;
        for r in 0..w.nrows() {
            for cc in 0..w.ncols() {
                err += (rec[(r, cc)].re - w[(r, cc)]).powi(2);
                norm += w[(r, cc)].powi(2);
            }
        }
        assert!(err / norm <= 1e-4 + 1e-12);
    }

    #[test]
    fn boresight_pixel_sums_taper() {
        let d = make_ba(2, 2).unwrap();
        let scene = Scene::new(vec![Target::new(0.0, 0.0, c(1.0, 0.0))], c(1.0, 0.0)).unwrap();
        let m = DMatrix::identity(d.len(), d.len());
        let x = snapshot(&d, &scene, &m).unwrap();
        let taper = chebyshev_taper_2d(2, 2, 40.0).unwrap();
        let w = coarray_weight_matrix(&d, &taper).unwrap();
        let iw = image_addition_weights(&w, 1.0).unwrap();
        let grid = ScanGrid::square(3).unwrap(); // center pixel is boresight
        let img = beamform_image(&x, &d, &iw, &grid).unwrap();
        let taper_sum: f64 = taper.iter().sum();
        assert!((img[(1, 1)] - c(taper_sum, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn fast_path_matches_direct_evaluation() {
        let d = make_ba(2, 2).unwrap(); // N = 8
        let scene = small_scene();
        let m = coupling_matrix(
            &d,
            &CouplingSpec {
                c1: 0.2,
                phase: 1.15 * PI,
            },
        );
        let x = snapshot(&d, &scene, &m).unwrap();
        let taper = chebyshev_taper_2d(2, 2, 40.0).unwrap();
        let w = coarray_weight_matrix(&d, &taper).unwrap();
        let iw = image_addition_weights(&w, 1.0).unwrap();
        let grid = ScanGrid::square(11).unwrap();
        let fast = beamform_image(&x, &d, &iw, &grid).unwrap();
        let direct = beamform_image_direct(&x, &d, &iw, &grid).unwrap();
        let scale = fast.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for (a, b) in fast.iter().zip(direct.iter()) {
            assert!((a - b).norm() <= 1e-10 * scale);
        }
    }

    #[test]
    fn parallel_and_seq_beamform_identical() {
        let d = make_cra(4, 4).unwrap();
        let scene = small_scene();
        let m = coupling_matrix(&d, &CouplingSpec { c1: 0.2, phase: 0.4 });
        let x = snapshot(&d, &scene, &m).unwrap();
        let taper = chebyshev_taper_2d(4, 4, 40.0).unwrap();
        let w = coarray_weight_matrix(&d, &taper).unwrap();
        let iw = image_addition_weights(&w, 0.9999).unwrap();
        let grid = ScanGrid::square(31).unwrap();
        let a = beamform_image(&x, &d, &iw, &grid).unwrap();
        let b = beamform_image_seq(&x, &d, &iw, &grid).unwrap();
        assert_eq!(a, b); // bitwise
    }

    #[test]
    fn beamform_is_linear_in_the_scene() {
        let d = make_ba(2, 2).unwrap();
        let s = small_scene();
        let m = DMatrix::identity(d.len(), d.len());
        let taper = chebyshev_taper_2d(2, 2, 40.0).unwrap();
        let w = coarray_weight_matrix(&d, &taper).unwrap();
        let iw = image_addition_weights(&w, 1.0).unwrap();
        let grid = ScanGrid::square(7).unwrap();
        let t = s.targets();
        let img = beamform_image(&snapshot(&d, &s, &m).unwrap(), &d, &iw, &grid).unwrap();
        let img1 = beamform_image(
            &snapshot(&d, &Scene::new(vec![t[0]], s.waveform()).unwrap(), &m).unwrap(),
            &d,
            &iw,
            &grid,
        )
        .unwrap();
        let img2 = beamform_image(
            &snapshot(&d, &Scene::new(vec![t[1]], s.waveform()).unwrap(), &m).unwrap(),
            &d,
            &iw,
            &grid,
        )
        .unwrap();
        let sum = &img1 + &img2;
        let scale = img.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for (a, b) in img.iter().zip(sum.iter()) {
            assert!((a - b).norm() < 1e-10 * scale);
        }
    }

    #[test]
    fn optimal_scale_trivial_cases() {
        let y = DMatrix::from_fn(3, 3, |i, j| c((i + 1) as f64, j as f64));
        assert_eq!(optimal_scale(&y, &y).unwrap(), c(1.0, 0.0));
        let y2 = &y * c(2.0, 0.0);
        assert_eq!(optimal_scale(&y2, &y).unwrap(), c(0.5, 0.0));
        let zero = DMatrix::from_element(3, 3, c(0.0, 0.0));
        assert_eq!(optimal_scale(&zero, &y), Err(Error::ZeroImage));
    }

    #[test]
    fn optimal_scale_beats_random_scalings() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut rnd = || (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 * 4.0 - 2.0;
        let y = DMatrix::from_fn(4, 4, |i, j| {
            c(((i * 4 + j) as f64).sin(), ((i + j) as f64).cos())
        });
        let yd = DMatrix::from_fn(4, 4, |i, j| {
            c(((i * 3 + j) as f64).cos(), ((2 * i + j) as f64).sin())
        });
        let alpha = optimal_scale(&y, &yd).unwrap();
        let err = |a: Complex64| -> f64 {
            y.iter()
                .zip(yd.iter())
                .map(|(yi, ydi)| (ydi - a * yi).norm_sqr())
                .sum()
        };
        let base = err(alpha);
        for _ in 0..100 {
            let beta = c(rnd(), rnd());
            assert!(base <= err(beta) + 1e-12);
        }
    }

    #[test]
    fn rmse_exact_and_scale_invariant() {
        let y = DMatrix::from_fn(5, 4, |i, j| c(i as f64 + 0.5, j as f64 - 1.0));
        assert_eq!(image_rmse(&y, &y).unwrap(), 0.0);
        let scaled = &y * c(0.3, -1.7);
        assert!(image_rmse(&scaled, &y).unwrap() < 1e-12);
    }

    #[test]
    fn monte_carlo_zero_coupling_is_exactly_zero() {
        let fam = ArrayFamily::new(ArrayKind::Cra, 4, 4).unwrap();
        let config = ImagingConfig {
            grid: ScanGrid::square(21).unwrap(),
            c1: 0.0,
            ..Default::default()
        };
        let r = monte_carlo_rmse(&fam, &config, 5, 42).unwrap();
        assert_eq!(r.mean, 0.0);
        assert_eq!(r.std_dev, 0.0);
        assert!(r.trials.iter().all(|&t| t == 0.0));
    }

    #[test]
    fn monte_carlo_is_deterministic_and_matches_seq() {
        let fam = ArrayFamily::new(ArrayKind::Ba, 3, 3).unwrap();
        let config = ImagingConfig {
            grid: ScanGrid::square(15).unwrap(),
            ..Default::default()
        };
        let a = monte_carlo_rmse(&fam, &config, 8, 123).unwrap();
        let b = monte_carlo_rmse(&fam, &config, 8, 123).unwrap();
        assert_eq!(a.trials, b.trials);
        let s = monte_carlo_rmse_seq(&fam, &config, 8, 123).unwrap();
        assert_eq!(a.trials, s.trials);
        // a different seed gives a different draw
        let d = monte_carlo_rmse(&fam, &config, 8, 124).unwrap();
        assert_ne!(a.trials, d.trials);
    }

    #[test]
    fn scene_validation() {
        assert!(Scene::new(vec![], c(1.0, 0.0)).is_err());
        assert!(Scene::new(vec![Target::new(0.0, 1.0, c(1.0, 0.0))], c(0.0, 0.0)).is_err());
        assert_eq!(Scene::demo().targets().len(), 16);
        for t in Scene::demo().targets() {
            let (vx, vy) = t.direction();
            assert!(vx * vx + vy * vy <= 1.0 + 1e-12);
        }
    }
}
