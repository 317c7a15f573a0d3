//! Sweeps over whole families of properties for one `n`.
//!
//! A property is a bit mask over class ids. Two dualities preserve
//! evasiveness: taking the set complement of the mask, and mapping every
//! member through graph complementation. With dualities on, a full sweep
//! solves only masks that are numerically smallest in their orbit under the
//! group generated by both, and expands every finding back through the orbit.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{ClassId, ClassMask, ClassTable};
use crate::position::PositionTable;
use crate::property::Property;
use crate::solver::{replay_verify, solve, strategy_from_report, EvasionProbe};

pub const CHECKPOINT_VERSION: u32 = 1;
/// Largest `n` the sweeps accept (34 classes fit one machine word).
pub const MAX_SCAN_VERTICES: usize = 5;

const BLOCK: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScanMode {
    Full,
    ComplementClosed,
    Sample,
}

impl ScanMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ScanMode::Full => "full",
            ScanMode::ComplementClosed => "complement-closed",
            ScanMode::Sample => "sample",
        }
    }
}

impl fmt::Display for ScanMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScanMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(ScanMode::Full),
            "complement-closed" => Ok(ScanMode::ComplementClosed),
            "sample" => Ok(ScanMode::Sample),
            other => Err(Error::ScanMode(format!("unknown mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanOptions {
    /// Skip masks that are not the smallest in their duality orbit.
    pub dualities: bool,
    /// Count masks with an odd number of labeled members as evasive
    /// without solving.
    pub parity_prune: bool,
    pub workers: usize,
    pub checkpoint: Option<PathBuf>,
    /// Continue from `checkpoint` instead of starting over.
    pub resume: bool,
    /// Stop once this candidate index is reached (the run can be resumed).
    pub stop_at: Option<u64>,
    pub checkpoint_every: u64,
    pub checkpoint_interval: Duration,
    pub sample_size: u64,
    pub seed: u64,
    /// In sample mode, run the full sweep instead when the sample is at least
    /// as large as the property space.
    pub exhaustive_fallback: bool,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            dualities: true,
            parity_prune: false,
            workers: 1,
            checkpoint: None,
            resume: false,
            stop_at: None,
            checkpoint_every: 1 << 20,
            checkpoint_interval: Duration::from_secs(60),
            sample_size: 1000,
            seed: 0,
            exhaustive_fallback: false,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub examined: u64,
    pub skipped_set_dual: u64,
    pub skipped_graph_dual: u64,
    pub pruned_parity: u64,
    pub evasive: u64,
    pub nonevasive: u64,
}

impl Counters {
    pub fn merge(&mut self, other: &Counters) {
        self.examined += other.examined;
        self.skipped_set_dual += other.skipped_set_dual;
        self.skipped_graph_dual += other.skipped_graph_dual;
        self.pruned_parity += other.pruned_parity;
        self.evasive += other.evasive;
        self.nonevasive += other.nonevasive;
    }

    /// Candidates accounted for.
    pub fn total(&self) -> u64 {
        self.examined + self.skipped_set_dual + self.skipped_graph_dual + self.pruned_parity
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanReport {
    pub n: usize,
    pub mode: ScanMode,
    pub candidates: u64,
    /// Next candidate index; equals `candidates` when the sweep finished.
    pub next: u64,
    pub counters: Counters,
    /// Nontrivial nonevasive properties, each as sorted class ids.
    pub findings: Vec<Vec<ClassId>>,
    #[serde(serialize_with = "as_seconds")]
    pub wall_time: Duration,
}

fn as_seconds<S: serde::Serializer>(d: &Duration, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64())
}

impl ScanReport {
    pub fn is_complete(&self) -> bool {
        self.next == self.candidates
    }

    pub fn without_timing(&self) -> ScanReport {
        ScanReport {
            wall_time: Duration::ZERO,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub n: usize,
    pub mode: ScanMode,
    pub next: u64,
    pub counters: Counters,
    pub findings: Vec<Vec<ClassId>>,
    #[serde(default)]
    pub parity_prune: bool,
    #[serde(default = "default_true")]
    pub dualities: bool,
}

fn default_true() -> bool {
    true
}

impl Checkpoint {
    pub fn parse(text: &str) -> Result<Self> {
        let c: Checkpoint = serde_json::from_str(text)?;
        if c.version != CHECKPOINT_VERSION {
            return Err(Error::CheckpointVersion {
                expected: CHECKPOINT_VERSION,
                found: c.version,
            });
        }
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("checkpoint serializes")
    }

    /// Writes through a temporary file so an interrupted save leaves the
    /// previous checkpoint intact.
    pub fn save(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, self.to_json()).map_err(|e| Error::io(&tmp, e))?;
        std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
    }
}

pub fn checkpoint_roundtrip(c: &Checkpoint) -> Result<Checkpoint> {
    Checkpoint::parse(&c.to_json())
}

/// Maps candidate indices to property masks and applies the skip rules.
struct Space {
    mode: ScanMode,
    width: usize,
    full: u64,
    candidates: u64,
    // graph-complement image, one lookup table per byte of the mask
    image: Vec<[u64; 256]>,
    // classes with an odd number of labeled graphs
    odd: u64,
    orbits: Vec<u64>,
    seed: u64,
    dualities: bool,
    parity_prune: bool,
}

enum Outcome {
    SetDual,
    GraphDual,
    Pruned,
    Evasive,
    Nonevasive,
}

impl Space {
    fn new(classes: &ClassTable, mode: ScanMode, options: &ScanOptions) -> Self {
        let width = classes.len();
        let full = if width == 64 { u64::MAX } else { (1u64 << width) - 1 };
        let mut image = vec![[0u64; 256]; width.div_ceil(8)];
        for (k, table) in image.iter_mut().enumerate() {
            for (byte, slot) in table.iter_mut().enumerate() {
                for bit in 0..8 {
                    let c = 8 * k + bit;
                    if byte >> bit & 1 == 1 && c < width {
                        *slot |= 1 << classes.complement_class(c);
                    }
                }
            }
        }
        let odd = (0..width)
            .filter(|&c| classes.orbit_size(c) % 2 == 1)
            .fold(0, |m, c| m | 1 << c);
        let mut orbits = Vec::new();
        for c in 0..width {
            let d = classes.complement_class(c);
            if d >= c {
                orbits.push(1 << c | 1 << d);
            }
        }
        let candidates = match mode {
            ScanMode::Full => 1u64 << width,
            ScanMode::ComplementClosed => 1u64 << orbits.len(),
            ScanMode::Sample => options.sample_size,
        };
        Space {
            mode,
            width,
            full,
            candidates,
            image,
            odd,
            orbits,
            seed: options.seed,
            dualities: options.dualities && mode != ScanMode::Sample,
            parity_prune: options.parity_prune,
        }
    }

    fn graph_image(&self, mask: u64) -> u64 {
        self.image
            .iter()
            .enumerate()
            .fold(0, |acc, (k, t)| acc | t[(mask >> (8 * k) & 0xff) as usize])
    }

    fn mask(&self, index: u64) -> u64 {
        match self.mode {
            ScanMode::Full => index,
            ScanMode::ComplementClosed => self
                .orbits
                .iter()
                .enumerate()
                .filter(|(k, _)| index >> k & 1 == 1)
                .fold(0, |m, (_, o)| m | o),
            ScanMode::Sample => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                rng.set_stream(index);
                loop {
                    let m = rng.gen::<u64>() & self.full;
                    if m != 0 && m != self.full {
                        break m;
                    }
                }
            }
        }
    }

    fn classify(&self, mask: u64, probe: &mut EvasionProbe) -> Outcome {
        if self.dualities {
            let set_dual = mask ^ self.full;
            if mask > set_dual {
                return Outcome::SetDual;
            }
            let graph_dual = self.graph_image(mask);
            if mask > graph_dual || mask > graph_dual ^ self.full {
                return Outcome::GraphDual;
            }
        }
        if self.parity_prune && (mask & self.odd).count_ones() % 2 == 1 {
            return Outcome::Pruned;
        }
        if probe.is_evasive(mask) {
            Outcome::Evasive
        } else {
            Outcome::Nonevasive
        }
    }

    /// The finding and its images under both dualities.
    fn expand(&self, mask: u64) -> Vec<u64> {
        let g = self.graph_image(mask);
        let mut orbit = vec![mask, mask ^ self.full, g, g ^ self.full];
        orbit.sort_unstable();
        orbit.dedup();
        orbit
    }

    fn ids(&self, mask: u64) -> Vec<ClassId> {
        (0..self.width).filter(|&c| mask >> c & 1 == 1).collect()
    }

    fn run_range(&self, table: &PositionTable, start: u64, end: u64) -> Result<(Counters, Vec<u64>)> {
        let mut probe = EvasionProbe::new(table)?;
        let mut counters = Counters::default();
        let mut found = Vec::new();
        for index in start..end {
            let mask = self.mask(index);
            match self.classify(mask, &mut probe) {
                Outcome::SetDual => counters.skipped_set_dual += 1,
                Outcome::GraphDual => counters.skipped_graph_dual += 1,
                Outcome::Pruned => counters.pruned_parity += 1,
                Outcome::Evasive => {
                    counters.examined += 1;
                    counters.evasive += 1;
                }
                Outcome::Nonevasive => {
                    counters.examined += 1;
                    counters.nonevasive += 1;
                    if mask != 0 && mask != self.full {
                        found.push(mask);
                    }
                }
            }
        }
        Ok((counters, found))
    }
}

fn check_scan_n(n: usize) -> Result<()> {
    if (2..=MAX_SCAN_VERTICES).contains(&n) {
        Ok(())
    } else {
        Err(Error::ScanMode(format!(
            "sweeps support 2 <= n <= {MAX_SCAN_VERTICES}, got n={n}"
        )))
    }
}

/// Runs a sweep of the given mode.
pub fn scan(n: usize, mode: ScanMode, options: &ScanOptions) -> Result<ScanReport> {
    check_scan_n(n)?;
    let classes = ClassTable::shared(n)?;
    let table = PositionTable::shared(n)?;
    if mode == ScanMode::Sample {
        if options.checkpoint.is_some() {
            return Err(Error::ScanMode("sample mode does not checkpoint".into()));
        }
        if options.exhaustive_fallback && options.sample_size >= 1u64 << classes.len() {
            return scan(n, ScanMode::Full, options);
        }
    }
    let space = Space::new(classes, mode, options);
    let started = Instant::now();

    let mut next = 0u64;
    let mut counters = Counters::default();
    let mut findings: BTreeSet<Vec<ClassId>> = BTreeSet::new();
    if options.resume {
        let path = options
            .checkpoint
            .as_deref()
            .ok_or_else(|| Error::CheckpointMismatch("resume requested without a checkpoint path".into()))?;
        let saved = Checkpoint::load(path)?;
        if saved.n != n || saved.mode != mode {
            return Err(Error::CheckpointMismatch(format!(
                "checkpoint is for n={} mode={}, scan is n={n} mode={mode}",
                saved.n, saved.mode
            )));
        }
        if saved.parity_prune != options.parity_prune || saved.dualities != options.dualities {
            return Err(Error::CheckpointMismatch(
                "checkpoint was written with different scan options".into(),
            ));
        }
        if saved.next > space.candidates || saved.counters.total() != saved.next {
            return Err(Error::CheckpointMismatch("checkpoint counters are inconsistent".into()));
        }
        next = saved.next;
        counters = saved.counters;
        findings.extend(saved.findings);
    }

    let stop = options
        .stop_at
        .map_or(space.candidates, |s| s.min(space.candidates))
        .max(next);
    let workers = options.workers.max(1) as u64;
    let mut since_save = 0u64;
    let mut last_save = Instant::now();
    let save = |next: u64, counters: &Counters, findings: &BTreeSet<Vec<ClassId>>| -> Result<()> {
        if let Some(path) = &options.checkpoint {
            Checkpoint {
                version: CHECKPOINT_VERSION,
                n,
                mode,
                next,
                counters: *counters,
                findings: findings.iter().cloned().collect(),
                parity_prune: options.parity_prune,
                dualities: options.dualities,
            }
            .save(path)?;
        }
        Ok(())
    };

    while next < stop {
        let end = (next + BLOCK * workers).min(stop);
        let span = end - next;
        let shard = span.div_ceil(workers);
        let results: Vec<Result<(Counters, Vec<u64>)>> = std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers)
                .map(|w| {
                    let lo = (next + w * shard).min(end);
                    let hi = (lo + shard).min(end);
                    let space = &space;
                    scope.spawn(move || space.run_range(table, lo, hi))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("scan worker panicked"))
                .collect()
        });
        for result in results {
            let (c, found) = result?;
            counters.merge(&c);
            for mask in found {
                for image in space.expand(mask) {
                    findings.insert(space.ids(image));
                }
            }
        }
        since_save += span;
        next = end;
        if since_save >= options.checkpoint_every || last_save.elapsed() >= options.checkpoint_interval {
            save(next, &counters, &findings)?;
            since_save = 0;
            last_save = Instant::now();
        }
    }
    save(next, &counters, &findings)?;

    for ids in &findings {
        verify_finding(classes, table, ids)?;
    }

    Ok(ScanReport {
        n,
        mode,
        candidates: space.candidates,
        next,
        counters,
        findings: findings.into_iter().collect(),
        wall_time: started.elapsed(),
    })
}

/// Re-solves a finding with the full solver and audits its strategy.
fn verify_finding(classes: &ClassTable, table: &PositionTable, ids: &[ClassId]) -> Result<()> {
    let property = Property::from_ids(classes, ids.iter().copied())?;
    let report = solve(&property, table)?;
    let fail = |why: &str| {
        Err(Error::ScanMode(format!(
            "finding {ids:?} failed re-verification: {why}"
        )))
    };
    if property.is_trivial() {
        return fail("trivial");
    }
    if report.is_evasive() {
        return fail("evasive on re-solve");
    }
    let strategy = strategy_from_report(&report, table)?;
    if !replay_verify(&strategy, &property, table)?.passed {
        return fail("strategy replay");
    }
    Ok(())
}

pub fn scan_full(n: usize, options: &ScanOptions) -> Result<ScanReport> {
    scan(n, ScanMode::Full, options)
}

pub fn scan_complement_closed(n: usize, options: &ScanOptions) -> Result<ScanReport> {
    scan(n, ScanMode::ComplementClosed, options)
}

pub fn scan_sample(n: usize, count: u64, seed: u64, options: &ScanOptions) -> Result<ScanReport> {
    let options = ScanOptions {
        sample_size: count,
        seed,
        ..options.clone()
    };
    scan(n, ScanMode::Sample, &options)
}

/// Property masks (as [`ClassMask`]) of the findings in a report.
pub fn finding_properties(report: &ScanReport) -> Result<Vec<Property>> {
    let classes = ClassTable::shared(report.n)?;
    report
        .findings
        .iter()
        .map(|ids| {
            Ok(Property::from_mask(
                report.n,
                ClassMask::from_ids(classes.len(), ids.iter().copied()),
            ))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n3_has_no_findings() {
        let r = scan_full(3, &ScanOptions::default()).unwrap();
        assert_eq!(r.candidates, 16);
        assert_eq!(r.counters.total(), 16);
        assert!(r.findings.is_empty());
    }

    #[test]
    fn sweep_rejects_large_n() {
        assert!(scan_full(6, &ScanOptions::default()).is_err());
        assert!(scan_full(1, &ScanOptions::default()).is_err());
    }

    #[test]
    fn mode_names_round_trip() {
        for mode in [ScanMode::Full, ScanMode::ComplementClosed, ScanMode::Sample] {
            assert_eq!(mode.as_str().parse::<ScanMode>().unwrap(), mode);
            let json = serde_json::to_string(&mode).unwrap();
            assert_eq!(json, format!("\"{}\"", mode.as_str()));
        }
        assert!("partial".parse::<ScanMode>().is_err());
    }

    #[test]
    fn complement_closed_candidate_count() {
        let classes = ClassTable::shared(5).unwrap();
        let space = Space::new(classes, ScanMode::ComplementClosed, &ScanOptions::default());
        assert_eq!(space.orbits.len(), 18);
        assert_eq!(space.candidates, 1 << 18);
    }

    #[test]
    fn graph_image_matches_property_image() {
        let classes = ClassTable::shared(5).unwrap();
        let space = Space::new(classes, ScanMode::Full, &ScanOptions::default());
        for mask in [0u64, 1, 0b1011_0110, (1 << 34) - 1, 0x2_f00f_1234] {
            let p = Property::from_mask(5, ClassMask::from_bits(34, mask));
            assert_eq!(
                space.graph_image(mask),
                p.graph_complement_image(classes).members().bits()
            );
        }
    }

    #[test]
    fn checkpoint_rejects_bad_version() {
        let c = Checkpoint {
            version: 2,
            n: 4,
            mode: ScanMode::Full,
            next: 0,
            counters: Counters::default(),
            findings: vec![],
            parity_prune: false,
            dualities: true,
        };
        assert!(matches!(
            checkpoint_roundtrip(&c),
            Err(Error::CheckpointVersion { found: 2, .. })
        ));
        assert!(matches!(Checkpoint::parse("{"), Err(Error::Parse(_))));
    }

    #[test]
    fn checkpoint_json_layout() {
        let c = Checkpoint {
            version: 1,
            n: 5,
            mode: ScanMode::Full,
            next: 7,
            counters: Counters::default(),
            findings: vec![vec![1, 2]],
            parity_prune: false,
            dualities: true,
        };
        let v: serde_json::Value = serde_json::from_str(&c.to_json()).unwrap();
        assert_eq!(v["version"], 1);
        assert_eq!(v["mode"], "full");
        assert_eq!(v["next"], 7);
        assert_eq!(v["findings"][0][1], 2);
        assert_eq!(checkpoint_roundtrip(&c).unwrap(), c);
        // the minimal documented layout parses
        let minimal = r#"{"version":1,"n":5,"mode":"full","next":0,"counters":{"examined":0,"skipped_set_dual":0,"skipped_graph_dual":0,"pruned_parity":0,"evasive":0,"nonevasive":0},"findings":[]}"#;
        assert!(Checkpoint::parse(minimal).unwrap().dualities);
    }
}
