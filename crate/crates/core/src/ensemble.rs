//! Trajectory ensembles over an `(Lx, Ly, r)` grid and their statistics.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{apply_maximal, apply_stochastic_layer, DecoherencePattern};
use crate::error::{Error, Result};
use crate::lattice::{InitialState, TorusLattice};
use crate::observables::{
    chi_ii_strings, ci_by_loop, cii_by_string, evaluate, negativity, negativity_k_range,
    ObservableRecord, ObservableSet,
};
use crate::percolation::{predict_ci, predict_cii_for_string, OpenBondGraph};
use crate::stabilizer::MixedStabilizerState;

/// Environment variable consulted for the master seed when neither the
/// command line nor the config file sets one.
pub const SEED_ENV: &str = "ZXTORIC_SEED";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub name: Option<String>,
    /// `[Lx, Ly]` pairs.
    pub sizes: Vec<[usize; 2]>,
    pub r_grid: Vec<f64>,
    pub samples: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub observables: ObservableSet,
    #[serde(default)]
    pub initial_state: InitialState,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::InvalidConfig("samples must be at least 1".into()));
        }
        if self.sizes.is_empty() || self.r_grid.is_empty() {
            return Err(Error::InvalidConfig(
                "sizes and r_grid must be non-empty".into(),
            ));
        }
        if let Some(&r) = self.r_grid.iter().find(|r| !(0.0..=1.0).contains(*r)) {
            return Err(Error::InvalidProbability(r));
        }
        for &[lx, ly] in &self.sizes {
            TorusLattice::new(lx, ly)?;
        }
        if self.threads == Some(0) {
            return Err(Error::InvalidConfig("threads must be positive".into()));
        }
        Ok(())
    }

    /// Master seed by precedence: explicit override, then file, then
    /// [`SEED_ENV`], then `0`.
    pub fn resolve_seed(&self, cli: Option<u64>) -> Result<u64> {
        if let Some(s) = cli.or(self.seed) {
            return Ok(s);
        }
        match std::env::var(SEED_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("{SEED_ENV}={v:?} is not a u64"))),
            Err(_) => Ok(0),
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Description of [`trajectory_seed`] written into output headers.
pub const SEED_SCHEME: &str = "h=splitmix64(master); for v in [Lx, Ly, r_index, sample]: h=splitmix64(h^v); ChaCha8Rng::seed_from_u64(h)";

/// Per-trajectory stream seed.
pub fn trajectory_seed(master: u64, lx: usize, ly: usize, r_index: usize, sample: usize) -> u64 {
    [lx, ly, r_index, sample]
        .iter()
        .fold(splitmix64(master), |h, &v| splitmix64(h ^ v as u64))
}

/// One sampled trajectory: its decoherence record and measured observables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    #[serde(rename = "Lx")]
    pub lx: usize,
    #[serde(rename = "Ly")]
    pub ly: usize,
    pub r_index: usize,
    pub r: f64,
    pub sample: usize,
    pub seed: u64,
    pub pattern: Vec<usize>,
    #[serde(flatten)]
    pub observables: ObservableRecord,
}

/// Dephases a copy of `initial` with stream `seed` and evaluates `which`.
pub fn run_trajectory(
    lattice: &TorusLattice,
    initial: &MixedStabilizerState,
    r: f64,
    seed: u64,
    which: &ObservableSet,
) -> Result<(DecoherencePattern, ObservableRecord)> {
    let mut state = initial.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pattern = apply_stochastic_layer(lattice, &mut state, r, &mut rng)?;
    let record = evaluate(lattice, &state, which)?;
    Ok((pattern, record))
}

/// Mean and unbiased variance by Welford's update, mergeable across chunks.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunningStats {
    pub n: usize,
    pub mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&self, other: &Self) -> Self {
        if self.n == 0 {
            return *other;
        }
        if other.n == 0 {
            return *self;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        let mean = self.mean + d * other.n as f64 / n as f64;
        let m2 = self.m2 + other.m2 + d * d * (self.n as f64) * (other.n as f64) / n as f64;
        Self { n, mean, m2 }
    }

    pub fn from_slice(xs: &[f64]) -> Self {
        let mut s = Self::default();
        xs.iter().for_each(|&x| s.push(x));
        s
    }

    /// Unbiased sample variance; `0` for fewer than two samples.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.m2 / (self.n - 1) as f64).max(0.0)
        }
    }

    pub fn stderr(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }
}

pub const CHI_I: &str = "chi_i";
pub const CHI_II: &str = "chi_ii";
pub const CHI_II_SCALED: &str = "chi_ii_scaled";
pub const P_LO: &str = "p_lo";
pub const F: &str = "F";
pub const DELTA0: &str = "delta0_n_a";

pub fn negativity_key(k_a: usize) -> String {
    format!("n_a_k{k_a}")
}

pub fn ci_key(k: usize) -> String {
    format!("c_i_k{k}")
}

/// Per-trajectory scalar series at one `(Lx, Ly, r)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsemblePoint {
    pub lx: usize,
    pub ly: usize,
    pub r_index: usize,
    pub r: f64,
    pub series: BTreeMap<String, Vec<f64>>,
}

impl EnsemblePoint {
    pub fn new(lx: usize, ly: usize, r_index: usize, r: f64) -> Self {
        Self {
            lx,
            ly,
            r_index,
            r,
            series: BTreeMap::new(),
        }
    }

    pub fn push_record(&mut self, rec: &ObservableRecord) {
        let mut add = |k: String, v: f64| self.series.entry(k).or_default().push(v);
        for p in &rec.negativity_by_k_a {
            add(negativity_key(p.k_a), p.n_a);
        }
        for (i, &c) in rec.c_i.iter().enumerate() {
            add(ci_key(i + 1), f64::from(u8::from(c)));
        }
        if let Some(x) = rec.chi_i {
            add(CHI_I.into(), x);
        }
        if let Some(x) = rec.chi_ii {
            add(CHI_II.into(), x);
            add(CHI_II_SCALED.into(), x * scale(self.lx, self.ly) as f64);
        }
        if let Some(x) = rec.p_logical_dead {
            add(P_LO.into(), x);
        }
    }

    pub fn samples(&self) -> usize {
        self.series.values().map(Vec::len).max().unwrap_or(0)
    }

    pub fn stats(&self, key: &str) -> Option<RunningStats> {
        self.series.get(key).map(|xs| RunningStats::from_slice(xs))
    }

    pub fn values(&self, key: &str) -> Result<&[f64]> {
        self.series.get(key).map(Vec::as_slice).ok_or_else(|| {
            Error::MissingData(format!(
                "{key} at Lx={} Ly={} r={}",
                self.lx, self.ly, self.r
            ))
        })
    }
}

/// `Lx(Ly−3)`, the number of strings in `χ^II`.
pub fn scale(lx: usize, ly: usize) -> usize {
    lx * ly.saturating_sub(3)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnsembleDataset {
    pub initial_state: InitialState,
    pub points: Vec<EnsemblePoint>,
}

impl EnsembleDataset {
    pub fn sizes(&self) -> Vec<(usize, usize)> {
        let mut s: Vec<_> = self.points.iter().map(|p| (p.lx, p.ly)).collect();
        s.dedup();
        s
    }

    pub fn curve(&self, lx: usize, ly: usize) -> impl Iterator<Item = &EnsemblePoint> {
        self.points.iter().filter(move |p| p.lx == lx && p.ly == ly)
    }
}

pub(crate) fn thread_pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        b = b.num_threads(t);
    }
    b.build().map_err(|e| Error::ThreadPool(e.to_string()))
}

/// Header line of a trajectory file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryHeader {
    pub format: String,
    pub master_seed: u64,
    pub seed_scheme: String,
    pub config: RunConfig,
}

/// Runs every `(size, r, sample)` of the config. Trajectories are written to
/// `sink` (header line first) in grid order. The header omits `threads` and
/// `output`, so the file depends only on the remaining config and the seed.
pub fn run_sweep(
    config: &RunConfig,
    master_seed: u64,
    mut sink: Option<&mut dyn Write>,
) -> Result<EnsembleDataset> {
    config.validate()?;
    let pool = thread_pool(config.threads)?;
    if let Some(w) = sink.as_deref_mut() {
        let header = TrajectoryHeader {
            format: "zxtoric-trajectories/1".into(),
            master_seed,
            seed_scheme: SEED_SCHEME.into(),
            config: RunConfig {
                threads: None,
                output: None,
                ..config.clone()
            },
        };
        serde_json::to_writer(&mut *w, &serde_json::json!({ "header": header }))?;
        w.write_all(b"\n")
            .map_err(|e| Error::io("<trajectory sink>", e))?;
    }
    let mut dataset = EnsembleDataset {
        initial_state: config.initial_state,
        points: Vec::new(),
    };
    for &[lx, ly] in &config.sizes {
        let lattice = TorusLattice::new(lx, ly)?;
        let initial = lattice.build_initial_state(config.initial_state);
        for (r_index, &r) in config.r_grid.iter().enumerate() {
            log::info!("Lx={lx} Ly={ly} r={r} ({} samples)", config.samples);
            let trajectories: Vec<Trajectory> = pool.install(|| {
                (0..config.samples)
                    .into_par_iter()
                    .map(|sample| {
                        let seed = trajectory_seed(master_seed, lx, ly, r_index, sample);
                        let (pattern, observables) =
                            run_trajectory(&lattice, &initial, r, seed, &config.observables)?;
                        Ok(Trajectory {
                            lx,
                            ly,
                            r_index,
                            r,
                            sample,
                            seed,
                            pattern: pattern.links,
                            observables,
                        })
                    })
                    .collect::<Result<_>>()
            })?;
            let mut point = EnsemblePoint::new(lx, ly, r_index, r);
            for t in &trajectories {
                point.push_record(&t.observables);
                if let Some(w) = sink.as_deref_mut() {
                    serde_json::to_writer(&mut *w, t)?;
                    w.write_all(b"\n")
                        .map_err(|e| Error::io("<trajectory sink>", e))?;
                }
            }
            dataset.points.push(point);
        }
    }
    Ok(dataset)
}

/// Reads a trajectory file back into its header and a dataset.
pub fn read_trajectories(path: &Path) -> Result<(TrajectoryHeader, EnsembleDataset)> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let malformed = |reason: String| Error::Malformed {
        path: path.to_path_buf(),
        reason,
    };
    let first = lines
        .next()
        .ok_or_else(|| malformed("empty file".into()))?
        .map_err(|e| Error::io(path, e))?;
    #[derive(Deserialize)]
    struct Wrapper {
        header: TrajectoryHeader,
    }
    let header = serde_json::from_str::<Wrapper>(&first)
        .map_err(|e| malformed(format!("header: {e}")))?
        .header;
    let mut dataset = EnsembleDataset {
        initial_state: header.config.initial_state,
        points: Vec::new(),
    };
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let t: Trajectory =
            serde_json::from_str(&line).map_err(|e| malformed(format!("line {}: {e}", i + 2)))?;
        let same = dataset
            .points
            .last()
            .is_some_and(|p| (p.lx, p.ly, p.r_index) == (t.lx, t.ly, t.r_index));
        if !same {
            dataset
                .points
                .push(EnsemblePoint::new(t.lx, t.ly, t.r_index, t.r));
        }
        dataset
            .points
            .last_mut()
            .expect("just pushed")
            .push_record(&t.observables);
    }
    Ok((header, dataset))
}

/// `N_A(ρ_f, k_A) − 3k_A` for the maximally decohered state on `lattice`.
/// Fails if this is not constant over the sampled `k_A` range.
pub fn calibrate_negativity_offset(lattice: &TorusLattice, start: InitialState) -> Result<f64> {
    let mut f = lattice.build_initial_state(start);
    apply_maximal(lattice, &mut f)?;
    let mut offset = None;
    for k_a in negativity_k_range(lattice) {
        let c = negativity(&f, &lattice.region_qubits(k_a)?)? - 3.0 * k_a as f64;
        match offset {
            None => offset = Some(c),
            Some(o) if o != c => {
                return Err(Error::DegenerateInput(format!(
                    "N_A(rho_f) is not 3 k_A + const on {}x{}",
                    lattice.lx(),
                    lattice.ly()
                )))
            }
            _ => {}
        }
    }
    offset.ok_or_else(|| Error::MissingData("no k_A values fit on the lattice".into()))
}

/// `Δ₀N_A = Σ_{k_A} (E[N_A(k_A)] − (3k_A + offset))²` with a propagated stderr.
pub fn delta0_negativity(point: &EnsemblePoint, offset: f64) -> Result<(f64, f64)> {
    let lattice = TorusLattice::new(point.lx, point.ly)?;
    let mut sum = 0.0;
    let mut var = 0.0;
    for k_a in negativity_k_range(&lattice) {
        let s = point
            .stats(&negativity_key(k_a))
            .ok_or_else(|| Error::MissingData(negativity_key(k_a)))?;
        let d = s.mean - (3.0 * k_a as f64 + offset);
        sum += d * d;
        var += (2.0 * d * s.stderr()).powi(2);
    }
    Ok((sum, var.sqrt()))
}

/// `F = Lx(Ly−3)·var(χ^II)` and its standard error from the sampling
/// variance of the unbiased variance estimator.
pub fn rescaled_variance(point: &EnsemblePoint) -> Result<(f64, f64)> {
    let xs = point.values(CHI_II)?;
    let n = xs.len();
    if n < 2 {
        return Err(Error::MissingData(format!(
            "F needs at least 2 samples, got {n}"
        )));
    }
    let c = scale(point.lx, point.ly) as f64;
    let stats = RunningStats::from_slice(xs);
    let s2 = stats.variance();
    let nf = n as f64;
    let m2 = xs.iter().map(|x| (x - stats.mean).powi(2)).sum::<f64>() / nf;
    let m4 = xs.iter().map(|x| (x - stats.mean).powi(4)).sum::<f64>() / nf;
    let var_s2 = if n > 3 {
        ((m4 - (nf - 3.0) / (nf - 1.0) * m2 * m2) / nf).max(0.0)
    } else {
        0.0
    };
    Ok((c * s2, c * var_s2.sqrt()))
}

/// One row of `summary.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    #[serde(rename = "Lx")]
    pub lx: usize,
    #[serde(rename = "Ly")]
    pub ly: usize,
    pub r: f64,
    pub observable: String,
    pub mean: f64,
    pub var: f64,
    pub stderr: f64,
    pub n: usize,
}

/// Summary rows for every series, plus derived `F` and `delta0_n_a` rows.
/// Derived rows carry their estimate in `mean` and its standard error in
/// `stderr` (`var = stderr²`).
pub fn summarize(dataset: &EnsembleDataset) -> Result<Vec<SummaryRow>> {
    let mut rows = Vec::new();
    let mut offsets: BTreeMap<(usize, usize), Option<f64>> = BTreeMap::new();
    for p in &dataset.points {
        for (key, xs) in &p.series {
            let s = RunningStats::from_slice(xs);
            rows.push(SummaryRow {
                lx: p.lx,
                ly: p.ly,
                r: p.r,
                observable: key.clone(),
                mean: s.mean,
                var: s.variance(),
                stderr: s.stderr(),
                n: s.n,
            });
        }
        let n = p.samples();
        if p.series.contains_key(CHI_II) && n >= 2 {
            let (f, sf) = rescaled_variance(p)?;
            rows.push(SummaryRow {
                lx: p.lx,
                ly: p.ly,
                r: p.r,
                observable: F.into(),
                mean: f,
                var: sf * sf,
                stderr: sf,
                n,
            });
        }
        if p.series.contains_key(&negativity_key(1)) {
            let offset = match offsets.get(&(p.lx, p.ly)) {
                Some(o) => *o,
                None => {
                    let o = calibrate_negativity_offset(
                        &TorusLattice::new(p.lx, p.ly)?,
                        dataset.initial_state,
                    )
                    .ok();
                    offsets.insert((p.lx, p.ly), o);
                    o
                }
            };
            if let Some(offset) = offset {
                let (d, sd) = delta0_negativity(p, offset)?;
                rows.push(SummaryRow {
                    lx: p.lx,
                    ly: p.ly,
                    r: p.r,
                    observable: DELTA0.into(),
                    mean: d,
                    var: sd * sd,
                    stderr: sd,
                    n,
                });
            }
        }
    }
    Ok(rows)
}

pub fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    for row in rows {
        w.serialize(row).map_err(|e| Error::Malformed {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_summary(path: &Path) -> Result<Vec<SummaryRow>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    csv::Reader::from_reader(file)
        .deserialize()
        .map(|r| {
            r.map_err(|e| Error::Malformed {
                path: path.to_path_buf(),
                reason: e.to_string(),
            })
        })
        .collect()
}

/// Files of one run directory.
#[derive(Clone, Debug)]
pub struct RunLayout {
    pub dir: PathBuf,
}

impl RunLayout {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn config(&self) -> PathBuf {
        self.dir.join("config.toml")
    }

    pub fn trajectories(&self) -> PathBuf {
        self.dir.join("trajectories.jsonl")
    }

    pub fn summary(&self) -> PathBuf {
        self.dir.join("summary.csv")
    }

    pub fn fit(&self) -> PathBuf {
        self.dir.join("fit.json")
    }

    pub fn collapsed(&self) -> PathBuf {
        self.dir.join("collapsed.csv")
    }
}

/// Runs a sweep and writes `config.toml`, `trajectories.jsonl` and `summary.csv`.
pub fn run_to_dir(
    config: &RunConfig,
    master_seed: u64,
    layout: &RunLayout,
) -> Result<EnsembleDataset> {
    fs::create_dir_all(&layout.dir).map_err(|e| Error::io(&layout.dir, e))?;
    let mut stored = config.clone();
    stored.seed = Some(master_seed);
    fs::write(layout.config(), stored.to_toml()?).map_err(|e| Error::io(layout.config(), e))?;
    let path = layout.trajectories();
    let file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    let mut w = BufWriter::new(file);
    let dataset = run_sweep(config, master_seed, Some(&mut w))?;
    w.flush().map_err(|e| Error::io(&path, e))?;
    write_summary(&layout.summary(), &summarize(&dataset)?)?;
    Ok(dataset)
}

/// Stabilizer-versus-percolation comparison for one string or loop.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleRow {
    pub trajectory: usize,
    #[serde(rename = "Lx")]
    pub lx: usize,
    #[serde(rename = "Ly")]
    pub ly: usize,
    pub r: f64,
    pub string: String,
    #[serde(rename = "stabilizer_CII")]
    pub stabilizer: u8,
    #[serde(rename = "oracle_CII")]
    pub oracle: u8,
    #[serde(rename = "match")]
    pub matched: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub trajectories: usize,
    pub cii_checks: usize,
    pub cii_mismatches: usize,
    pub ci_checks: usize,
    pub ci_mismatches: usize,
    pub rows: Vec<OracleRow>,
}

/// Samples trajectories over `sizes × r_grid` (cycling) and compares each
/// `C^II` string and `C^I` loop with the pattern-only prediction.
pub fn oracle_check(
    sizes: &[[usize; 2]],
    r_grid: &[f64],
    trajectories: usize,
    start: InitialState,
    master_seed: u64,
    threads: Option<usize>,
) -> Result<OracleReport> {
    if sizes.is_empty() || r_grid.is_empty() {
        return Err(Error::InvalidConfig(
            "oracle check needs sizes and r values".into(),
        ));
    }
    let pool = thread_pool(threads)?;
    let prepared = sizes
        .iter()
        .map(|&[lx, ly]| {
            let lattice = TorusLattice::new(lx, ly)?;
            let initial = lattice.build_initial_state(start);
            Ok((lattice, initial))
        })
        .collect::<Result<Vec<_>>>()?;
    let per: Vec<(Vec<OracleRow>, usize, usize)> = pool.install(|| {
        (0..trajectories)
            .into_par_iter()
            .map(|t| {
                let [lx, ly] = sizes[t % sizes.len()];
                let r_index = (t / sizes.len()) % r_grid.len();
                let r = r_grid[r_index];
                let (lattice, initial) = &prepared[t % sizes.len()];
                let mut state = initial.clone();
                let mut rng =
                    ChaCha8Rng::seed_from_u64(trajectory_seed(master_seed, lx, ly, r_index, t));
                let pattern = apply_stochastic_layer(lattice, &mut state, r, &mut rng)?;
                let mut graph = OpenBondGraph::from_pattern(lattice, &pattern)?;
                let stab = cii_by_string(lattice, &state)?;
                let mut rows = Vec::new();
                for (i, (ix, len)) in chi_ii_strings(lattice)?.into_iter().enumerate() {
                    let path = lattice.vertical_path(ix, len)?;
                    let oracle = predict_cii_for_string(&mut graph, &path, start)?;
                    rows.push(OracleRow {
                        trajectory: t,
                        lx,
                        ly,
                        r,
                        string: format!("v({ix},0..{len})"),
                        stabilizer: u8::from(stab[i]),
                        oracle: u8::from(oracle),
                        matched: stab[i] == oracle,
                    });
                }
                let ci = ci_by_loop(lattice, &state)?;
                let mut ci_bad = 0;
                for (k, &c) in ci.iter().enumerate() {
                    let gamma = lattice.square_loop(k + 1)?;
                    ci_bad += usize::from(predict_ci(lattice, &pattern, &gamma) != c);
                }
                Ok((rows, ci.len(), ci_bad))
            })
            .collect::<Result<_>>()
    })?;
    let mut report = OracleReport {
        trajectories,
        ..Default::default()
    };
    for (rows, ci_n, ci_bad) in per {
        report.cii_checks += rows.len();
        report.cii_mismatches += rows.iter().filter(|r| !r.matched).count();
        report.ci_checks += ci_n;
        report.ci_mismatches += ci_bad;
        report.rows.extend(rows);
    }
    Ok(report)
}

pub fn write_oracle_csv(path: &Path, rows: &[OracleRow]) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    for row in rows {
        w.serialize(row).map_err(|e| Error::Malformed {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
