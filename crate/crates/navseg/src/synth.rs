//! Synthetic corpus of surface-normal scenes with known navigable boundaries.
//!
//! Each scene is a height-by-width field of unit normals: pixels below a
//! smooth boundary curve face up, pixels above it face sideways. Structural
//! noise is injected into annotated column intervals (amplified perturbation
//! plus wrong-class distractor patches near the boundary) so that label
//! ambiguity is localized and measurable downstream.
//!
//! All randomness derives from (corpus seed, split, scene index); generation
//! is embarrassingly parallel and byte-deterministic.

use crate::rng;
use crate::ten;
use crate::{Error, Result};
use ndarray::{Array2, Array3};
use rayon::prelude::*;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

/// Vertically monotone boundary: a single-valued curve over column index,
/// interpolated through control points with a shape-preserving
/// (Fritsch-Carlson) piecewise cubic, so the evaluated curve never leaves the
/// control-point range.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryCurve {
    pub control_x: Vec<f64>,
    pub control_y: Vec<f64>,
    slopes: Vec<f64>,
}

impl BoundaryCurve {
    pub fn new(control_x: Vec<f64>, control_y: Vec<f64>) -> Result<Self> {
        if control_x.len() != control_y.len() || control_x.len() < 2 {
            return Err(Error::invalid("curve needs >= 2 matched control points"));
        }
        if control_x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("curve control columns must strictly increase"));
        }
        let slopes = monotone_slopes(&control_x, &control_y);
        Ok(Self {
            control_x,
            control_y,
            slopes,
        })
    }

    /// Boundary row at column `u` (clamped to the control span).
    pub fn eval(&self, u: f64) -> f64 {
        let xs = &self.control_x;
        let ys = &self.control_y;
        let n = xs.len();
        if u <= xs[0] {
            return ys[0];
        }
        if u >= xs[n - 1] {
            return ys[n - 1];
        }
        let j = match xs.partition_point(|&x| x <= u) {
            0 => 0,
            k => k - 1,
        };
        let h = xs[j + 1] - xs[j];
        let t = (u - xs[j]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        ys[j] * (2.0 * t3 - 3.0 * t2 + 1.0)
            + h * self.slopes[j] * (t3 - 2.0 * t2 + t)
            + ys[j + 1] * (-2.0 * t3 + 3.0 * t2)
            + h * self.slopes[j + 1] * (t3 - t2)
    }
}

/// Fritsch-Carlson slope construction: segment-wise monotone, hence bounded
/// by the data range.
fn monotone_slopes(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut d = vec![0.0; n - 1];
    for j in 0..n - 1 {
        d[j] = (ys[j + 1] - ys[j]) / (xs[j + 1] - xs[j]);
    }
    let mut m = vec![0.0; n];
    m[0] = d[0];
    m[n - 1] = d[n - 2];
    for j in 1..n - 1 {
        m[j] = if d[j - 1] * d[j] <= 0.0 {
            0.0
        } else {
            0.5 * (d[j - 1] + d[j])
        };
    }
    for j in 0..n - 1 {
        if d[j] == 0.0 {
            m[j] = 0.0;
            m[j + 1] = 0.0;
        } else {
            let a = m[j] / d[j];
            let b = m[j + 1] / d[j];
            let s = a * a + b * b;
            if s > 9.0 {
                let t = 3.0 / s.sqrt();
                m[j] = t * a * d[j];
                m[j + 1] = t * b * d[j];
            }
        }
    }
    m
}

/// Perturbation magnitudes for scene synthesis. `base` applies everywhere;
/// inside noise regions it is multiplied by `amplification`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    pub base: f64,
    pub amplification: f64,
}

impl Default for NoiseParams {
    fn default() -> Self {
        Self {
            base: 0.05,
            amplification: 6.0,
        }
    }
}

/// One synthetic scene: normals are stored as the file format stores them
/// (f32, H x W x 3), the mask is 1 where the pixel row lies strictly below
/// the boundary curve.
#[derive(Debug, Clone)]
pub struct SceneSample {
    pub normals: Array3<f32>,
    pub mask: Array2<u8>,
    pub curve: BoundaryCurve,
    pub noise_regions: Vec<(usize, usize)>,
    pub seed: u64,
}

impl SceneSample {
    pub fn height(&self) -> usize {
        self.normals.shape()[0]
    }

    pub fn width(&self) -> usize {
        self.normals.shape()[1]
    }

    /// Normals as f64, H x W x 3.
    pub fn normals_f64(&self) -> Array3<f64> {
        self.normals.mapv(|v| v as f64)
    }
}

/// Deterministic boundary with control rows confined to the central band of
/// the image ([0.15 H, 0.85 H]).
pub fn generate_boundary(seed: u64, w: usize, m: usize, h: usize) -> Result<BoundaryCurve> {
    if m < 3 {
        return Err(Error::invalid(format!("need at least 3 control points, got {m}")));
    }
    if w < 16 || h < 16 {
        return Err(Error::invalid(format!("image must be at least 16x16, got {h}x{w}")));
    }
    let mut r = rng::stream(&[seed, 0xB0]);
    let lo = 0.15 * h as f64;
    let hi = 0.85 * h as f64;
    let control_x: Vec<f64> = (0..m)
        .map(|j| j as f64 * (w - 1) as f64 / (m - 1) as f64)
        .collect();
    let control_y: Vec<f64> = (0..m).map(|_| rng::uniform(&mut r, lo, hi)).collect();
    BoundaryCurve::new(control_x, control_y)
}

const DISTRACTOR_ROW_SPREAD: f64 = 6.0;
const SIDE_ELEVATION: f64 = 0.25; // radians; keeps non-navigable normals near-horizontal

/// Render a scene from a boundary curve. Navigable pixels get up-facing
/// normals, non-navigable pixels near-horizontal ones; noise regions get
/// amplified perturbation and wrong-class distractor patches straddling the
/// boundary. The mask matches the curve exactly.
pub fn render_scene(
    curve: &BoundaryCurve,
    h: usize,
    w: usize,
    noise: &NoiseParams,
    seed: u64,
) -> Result<SceneSample> {
    if h < 16 || w < 16 {
        return Err(Error::invalid(format!("image must be at least 16x16, got {h}x{w}")));
    }
    let mut r = rng::stream(&[seed, 0x5C]);

    let noise_regions = sample_noise_regions(&mut r, w);
    let curve_rows: Vec<f64> = (0..w).map(|u| curve.eval(u as f64)).collect();
    let in_region = |u: usize| noise_regions.iter().any(|&(lo, hi)| u >= lo && u < hi);

    let mut normals = Array3::<f32>::zeros((h, w, 3));
    let mut mask = Array2::<u8>::zeros((h, w));

    for v in 0..h {
        for u in 0..w {
            let navigable = (v as f64) > curve_rows[u];
            mask[[v, u]] = navigable as u8;
            let rho = if in_region(u) {
                noise.base * noise.amplification
            } else {
                noise.base
            };
            let base = if navigable {
                [0.0, 0.0, 1.0]
            } else {
                sample_side_normal(&mut r)
            };
            let n = perturb_unit(&mut r, base, rho);
            for c in 0..3 {
                normals[[v, u, c]] = n[c] as f32;
            }
        }
    }

    // Wrong-class distractor patches near the boundary, only inside noise
    // regions.
    for &(lo, hi) in &noise_regions {
        let width = hi - lo;
        let n_patches = (width / 6).clamp(2, 6);
        let rho = noise.base * noise.amplification;
        for _ in 0..n_patches {
            let cx = rng::uniform_usize(&mut r, lo, hi);
            let cy = curve_rows[cx]
                + rng::uniform(&mut r, -DISTRACTOR_ROW_SPREAD, DISTRACTOR_ROW_SPREAD);
            let pw = rng::uniform_usize(&mut r, 3, 9);
            let ph = rng::uniform_usize(&mut r, 3, 9);
            let u0 = (cx as i64 - pw as i64 / 2).max(0) as usize;
            let u1 = (u0 + pw).min(w);
            let v0 = (cy as i64 - ph as i64 / 2).max(0) as usize;
            let v1 = (v0 + ph).min(h);
            for v in v0..v1 {
                for u in u0..u1 {
                    let navigable = (v as f64) > curve_rows[u];
                    let base = if navigable {
                        sample_side_normal(&mut r)
                    } else {
                        [0.0, 0.0, 1.0]
                    };
                    let n = perturb_unit(&mut r, base, rho);
                    for c in 0..3 {
                        normals[[v, u, c]] = n[c] as f32;
                    }
                }
            }
        }
    }

    Ok(SceneSample {
        normals,
        mask,
        curve: curve.clone(),
        noise_regions,
        seed,
    })
}

fn sample_noise_regions(r: &mut rand_chacha::ChaCha8Rng, w: usize) -> Vec<(usize, usize)> {
    use rand::Rng as _;
    let count = if r.gen::<f64>() < 0.5 { 1 } else { 2 };
    let mut regions: Vec<(usize, usize)> = Vec::new();
    for _ in 0..count {
        let mut placed = false;
        for _attempt in 0..20 {
            let width = rng::uniform_usize(r, w / 8, w / 4 + 1);
            let lo = rng::uniform_usize(r, 0, w - width + 1);
            let hi = lo + width;
            if regions.iter().all(|&(a, b)| hi <= a || lo >= b) {
                regions.push((lo, hi));
                placed = true;
                break;
            }
        }
        if !placed {
            break;
        }
    }
    regions.sort_unstable();
    regions
}

fn sample_side_normal(r: &mut rand_chacha::ChaCha8Rng) -> [f64; 3] {
    let phi = rng::uniform(r, 0.0, std::f64::consts::TAU);
    let theta = rng::uniform(r, -SIDE_ELEVATION, SIDE_ELEVATION);
    [
        phi.cos() * theta.cos(),
        phi.sin() * theta.cos(),
        theta.sin(),
    ]
}

fn perturb_unit(r: &mut rand_chacha::ChaCha8Rng, base: [f64; 3], rho: f64) -> [f64; 3] {
    let g = [rng::normal(r), rng::normal(r), rng::normal(r)];
    let v = [
        base[0] + rho * g[0],
        base[1] + rho * g[1],
        base[2] + rho * g[2],
    ];
    let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if norm < 1e-6 {
        return base;
    }
    [v[0] / norm, v[1] / norm, v[2] / norm]
}

// ---------------------------------------------------------------------------
// Corpus build and persistence
// ---------------------------------------------------------------------------

/// Everything that determines a corpus byte-for-byte.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusConfig {
    pub out: PathBuf,
    pub n_train: usize,
    pub n_test: usize,
    pub h: usize,
    pub w: usize,
    pub m_controls: usize,
    pub p: f64,
    pub seed: u64,
    pub noise: NoiseParams,
    pub overwrite: bool,
}

impl CorpusConfig {
    pub fn new(out: impl Into<PathBuf>) -> Self {
        Self {
            out: out.into(),
            n_train: 200,
            n_test: 40,
            h: 64,
            w: 96,
            m_controls: 5,
            p: 1.0,
            seed: 1,
            noise: NoiseParams::default(),
            overwrite: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.h < 16 || self.w < 16 {
            return Err(Error::invalid("corpus images must be at least 16x16"));
        }
        if self.m_controls < 3 {
            return Err(Error::invalid("need at least 3 curve control points"));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::invalid(format!("label fraction {} outside [0,1]", self.p)));
        }
        if self.n_train == 0 {
            return Err(Error::invalid("corpus needs at least one training scene"));
        }
        Ok(())
    }
}

/// Corpus provenance, mirrored in `manifest.txt`.
#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub version: u32,
    pub seed: u64,
    pub h: usize,
    pub w: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub p: f64,
    pub noise_base: f64,
    pub noise_amp: f64,
}

impl Manifest {
    fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "version={}", self.version);
        let _ = writeln!(s, "seed={}", self.seed);
        let _ = writeln!(s, "h={}", self.h);
        let _ = writeln!(s, "w={}", self.w);
        let _ = writeln!(s, "n_train={}", self.n_train);
        let _ = writeln!(s, "n_test={}", self.n_test);
        let _ = writeln!(s, "p={}", self.p);
        let _ = writeln!(s, "noise_base={}", self.noise_base);
        let _ = writeln!(s, "noise_amp={}", self.noise_amp);
        s
    }

    fn parse(path: &Path, text: &str) -> Result<Self> {
        let mut version = None;
        let mut seed = None;
        let mut h = None;
        let mut w = None;
        let mut n_train = None;
        let mut n_test = None;
        let mut p = None;
        let mut noise_base = None;
        let mut noise_amp = None;
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::corrupt(path, format!("line {}: expected key=value", ln + 1)))?;
            let bad = |what: &str| Error::corrupt(path, format!("line {}: bad {what}", ln + 1));
            match k {
                "version" => version = Some(v.parse().map_err(|_| bad("version"))?),
                "seed" => seed = Some(v.parse().map_err(|_| bad("seed"))?),
                "h" => h = Some(v.parse().map_err(|_| bad("h"))?),
                "w" => w = Some(v.parse().map_err(|_| bad("w"))?),
                "n_train" => n_train = Some(v.parse().map_err(|_| bad("n_train"))?),
                "n_test" => n_test = Some(v.parse().map_err(|_| bad("n_test"))?),
                "p" => p = Some(v.parse().map_err(|_| bad("p"))?),
                "noise_base" => noise_base = Some(v.parse().map_err(|_| bad("noise_base"))?),
                "noise_amp" => noise_amp = Some(v.parse().map_err(|_| bad("noise_amp"))?),
                other => {
                    return Err(Error::corrupt(path, format!("unknown manifest key '{other}'")))
                }
            }
        }
        let missing = |what: &str| Error::corrupt(path, format!("missing manifest key '{what}'"));
        Ok(Self {
            version: version.ok_or_else(|| missing("version"))?,
            seed: seed.ok_or_else(|| missing("seed"))?,
            h: h.ok_or_else(|| missing("h"))?,
            w: w.ok_or_else(|| missing("w"))?,
            n_train: n_train.ok_or_else(|| missing("n_train"))?,
            n_test: n_test.ok_or_else(|| missing("n_test"))?,
            p: p.ok_or_else(|| missing("p"))?,
            noise_base: noise_base.ok_or_else(|| missing("noise_base"))?,
            noise_amp: noise_amp.ok_or_else(|| missing("noise_amp"))?,
        })
    }
}

/// In-memory corpus handle returned by [`build_corpus`].
#[derive(Debug, Clone)]
pub struct Corpus {
    pub train: Vec<SceneSample>,
    pub test: Vec<SceneSample>,
    pub labeled_fraction: f64,
    pub labeled_ids: Vec<usize>,
    pub manifest: Manifest,
}

/// Which half of the corpus a scene belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn dir_name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }

    fn label(self) -> u64 {
        match self {
            Split::Train => 0,
            Split::Test => 1,
        }
    }
}

fn scene_dir_name(idx: usize) -> String {
    format!("scene_{idx:05}")
}

/// The labeled subset is a prefix of a seeded permutation, so subsets nest
/// across label fractions at a fixed seed.
pub fn labeled_prefix(seed: u64, n_train: usize, p: f64) -> Vec<usize> {
    let count = (p * n_train as f64).round() as usize;
    let mut ids = rng::permutation(rng::mix(&[seed, 2, 0x1AB]), n_train);
    ids.truncate(count.min(n_train));
    ids
}

fn build_scene(config: &CorpusConfig, split: Split, idx: usize) -> Result<SceneSample> {
    let scene_seed = rng::mix(&[config.seed, split.label(), idx as u64]);
    let curve = generate_boundary(
        rng::mix(&[scene_seed, 1]),
        config.w,
        config.m_controls,
        config.h,
    )?;
    render_scene(
        &curve,
        config.h,
        config.w,
        &config.noise,
        rng::mix(&[scene_seed, 2]),
    )
}

fn write_scene(dir: &Path, scene: &SceneSample) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let (h, w) = (scene.height(), scene.width());
    ten::write_ten(
        &dir.join("normals.ten"),
        &[h, w, 3],
        scene.normals.as_slice().expect("contiguous"),
    )?;
    let mask_f: Vec<f32> = scene.mask.iter().map(|&m| m as f32).collect();
    ten::write_ten(&dir.join("mask.ten"), &[h, w], &mask_f)?;

    let mut curve_txt = String::new();
    for (x, y) in scene.curve.control_x.iter().zip(&scene.curve.control_y) {
        let _ = writeln!(curve_txt, "{x} {y}");
    }
    let p = dir.join("curve.txt");
    fs::write(&p, curve_txt).map_err(|e| Error::io(&p, e))?;

    let mut noise_txt = String::new();
    for &(lo, hi) in &scene.noise_regions {
        let _ = writeln!(noise_txt, "{lo} {hi}");
    }
    let p = dir.join("noise.txt");
    fs::write(&p, noise_txt).map_err(|e| Error::io(&p, e))?;
    Ok(())
}

/// Generate the corpus and persist it to `config.out`. Byte-identical for a
/// fixed config; refuses a non-empty output directory unless `overwrite`.
pub fn build_corpus(config: &CorpusConfig) -> Result<Corpus> {
    config.validate()?;
    let root = &config.out;
    if root.exists() {
        let non_empty = fs::read_dir(root)
            .map_err(|e| Error::io(root, e))?
            .next()
            .is_some();
        if non_empty && !config.overwrite {
            return Err(Error::invalid(format!(
                "output directory {} is not empty (pass --overwrite to replace it)",
                root.display()
            )));
        }
        if non_empty {
            fs::remove_dir_all(root).map_err(|e| Error::io(root, e))?;
        }
    }
    fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;

    let gen_split = |split: Split, n: usize| -> Result<Vec<SceneSample>> {
        (0..n)
            .into_par_iter()
            .map(|i| {
                let scene = build_scene(config, split, i)?;
                let dir = root.join(split.dir_name()).join(scene_dir_name(i));
                write_scene(&dir, &scene)?;
                Ok(scene)
            })
            .collect()
    };
    let train = gen_split(Split::Train, config.n_train)?;
    let test = gen_split(Split::Test, config.n_test)?;

    let labeled_ids = labeled_prefix(config.seed, config.n_train, config.p);
    let mut ids_txt = String::new();
    for &id in &labeled_ids {
        let _ = writeln!(ids_txt, "{id}");
    }
    let p = root.join("labeled_ids.txt");
    fs::write(&p, ids_txt).map_err(|e| Error::io(&p, e))?;

    let manifest = Manifest {
        version: 1,
        seed: config.seed,
        h: config.h,
        w: config.w,
        n_train: config.n_train,
        n_test: config.n_test,
        p: config.p,
        noise_base: config.noise.base,
        noise_amp: config.noise.amplification,
    };
    let p = root.join("manifest.txt");
    fs::write(&p, manifest.render()).map_err(|e| Error::io(&p, e))?;

    Ok(Corpus {
        train,
        test,
        labeled_fraction: config.p,
        labeled_ids,
        manifest,
    })
}

// ---------------------------------------------------------------------------
// Corpus loading with a mask-read audit
// ---------------------------------------------------------------------------

/// On-disk corpus reader. Every ground-truth mask read is recorded, which is
/// how unsupervised training proves it never touched a label.
#[derive(Debug)]
pub struct CorpusStore {
    root: PathBuf,
    pub manifest: Manifest,
    mask_audit: Mutex<Vec<PathBuf>>,
}

impl CorpusStore {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        let mpath = root.join("manifest.txt");
        let text = fs::read_to_string(&mpath).map_err(|e| Error::io(&mpath, e))?;
        let manifest = Manifest::parse(&mpath, &text)?;
        Ok(Self {
            root,
            manifest,
            mask_audit: Mutex::new(Vec::new()),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn scene_count(&self, split: Split) -> usize {
        match split {
            Split::Train => self.manifest.n_train,
            Split::Test => self.manifest.n_test,
        }
    }

    fn scene_dir(&self, split: Split, idx: usize) -> PathBuf {
        self.root.join(split.dir_name()).join(scene_dir_name(idx))
    }

    fn check_idx(&self, split: Split, idx: usize) -> Result<()> {
        let n = self.scene_count(split);
        if idx >= n {
            return Err(Error::invalid(format!(
                "scene index {idx} out of range for {} split of size {n}",
                split.dir_name()
            )));
        }
        Ok(())
    }

    /// Surface normals as f64, H x W x 3.
    pub fn load_normals(&self, split: Split, idx: usize) -> Result<Array3<f64>> {
        self.check_idx(split, idx)?;
        let path = self.scene_dir(split, idx).join("normals.ten");
        let (dims, data) = ten::read_ten(&path)?;
        let (h, w) = (self.manifest.h, self.manifest.w);
        if dims != [h, w, 3] {
            return Err(Error::corrupt(
                &path,
                format!("expected dims [{h}, {w}, 3], got {dims:?}"),
            ));
        }
        let data: Vec<f64> = data.into_iter().map(|v| v as f64).collect();
        Ok(Array3::from_shape_vec((h, w, 3), data).expect("checked dims"))
    }

    /// Ground-truth mask. Recorded in the audit log.
    pub fn load_mask(&self, split: Split, idx: usize) -> Result<Array2<u8>> {
        self.check_idx(split, idx)?;
        let path = self.scene_dir(split, idx).join("mask.ten");
        self.mask_audit.lock().expect("audit lock").push(path.clone());
        let (dims, data) = ten::read_ten(&path)?;
        let (h, w) = (self.manifest.h, self.manifest.w);
        if dims != [h, w] {
            return Err(Error::corrupt(
                &path,
                format!("expected dims [{h}, {w}], got {dims:?}"),
            ));
        }
        let mut mask = Vec::with_capacity(data.len());
        for v in data {
            if v == 0.0 {
                mask.push(0u8);
            } else if v == 1.0 {
                mask.push(1u8);
            } else {
                return Err(Error::corrupt(&path, format!("non-binary mask value {v}")));
            }
        }
        Ok(Array2::from_shape_vec((h, w), mask).expect("checked dims"))
    }

    pub fn load_curve(&self, split: Split, idx: usize) -> Result<BoundaryCurve> {
        self.check_idx(split, idx)?;
        let path = self.scene_dir(split, idx).join("curve.txt");
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let bad = || Error::corrupt(&path, format!("line {}: expected '<column> <row>'", ln + 1));
            let x: f64 = it.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
            let y: f64 = it.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
            if it.next().is_some() {
                return Err(bad());
            }
            xs.push(x);
            ys.push(y);
        }
        BoundaryCurve::new(xs, ys)
    }

    pub fn load_noise_regions(&self, split: Split, idx: usize) -> Result<Vec<(usize, usize)>> {
        self.check_idx(split, idx)?;
        let path = self.scene_dir(split, idx).join("noise.txt");
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let mut regions = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let bad = || Error::corrupt(&path, format!("line {}: expected '<c_lo> <c_hi>'", ln + 1));
            let lo: usize = it.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
            let hi: usize = it.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
            if it.next().is_some() || hi <= lo {
                return Err(bad());
            }
            regions.push((lo, hi));
        }
        Ok(regions)
    }

    /// Labeled train ids stored with the corpus, in nesting (permutation
    /// prefix) order.
    pub fn labeled_ids(&self) -> Result<Vec<usize>> {
        let path = self.root.join("labeled_ids.txt");
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let mut ids = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let id: usize = line
                .parse()
                .map_err(|_| Error::corrupt(&path, format!("line {}: bad index", ln + 1)))?;
            if id >= self.manifest.n_train {
                return Err(Error::corrupt(
                    &path,
                    format!("line {}: index {id} out of range", ln + 1),
                ));
            }
            ids.push(id);
        }
        Ok(ids)
    }

    /// Number of mask files read through this store so far.
    pub fn mask_reads(&self) -> usize {
        self.mask_audit.lock().expect("audit lock").len()
    }

    pub fn mask_read_paths(&self) -> Vec<PathBuf> {
        self.mask_audit.lock().expect("audit lock").clone()
    }
}
