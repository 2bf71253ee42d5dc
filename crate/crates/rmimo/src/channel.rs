//! Pattern-indexed channel generation.
//!
//! Two propagation models feed the simulator: a deterministic free-space
//! line-of-sight model for the fixed-aperture E-field experiment, and a
//! clustered geometric stochastic model for the urban macro cell. Both
//! expose the channel as a function of the per-antenna pattern assignment:
//! changing antenna n's pattern index changes only entry n of every user's
//! channel vector.

use std::io::Read;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::patterns::{Direction, PatternSet, PatternSpec};
use crate::seeds::derive_seed;

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Reference aperture area (m^2) shared across array sizes; each element
/// carries an effective area of `A_REF / N_t` so the dense limit of the
/// free-space channel norm exists.
pub const A_REF: f64 = 1.0;

/// Transmit array layout: element positions, polarization slants, and the
/// element-to-RF-chain map of the sub-connected architecture.
#[derive(Clone, Debug, PartialEq)]
pub struct ArrayGeometry {
    element_positions: Vec<[f64; 3]>,
    polarization_slant: Vec<f64>,
    subarray_map: Vec<usize>,
    wavelength: f64,
}

impl ArrayGeometry {
    pub fn new(
        element_positions: Vec<[f64; 3]>,
        polarization_slant: Vec<f64>,
        subarray_map: Vec<usize>,
        wavelength: f64,
    ) -> Result<Self> {
        let n = element_positions.len();
        if n == 0 {
            return Err(Error::Config("array needs at least one element".into()));
        }
        if polarization_slant.len() != n || subarray_map.len() != n {
            return Err(Error::Config(
                "positions, slants, and subarray map must have equal length".into(),
            ));
        }
        if !(wavelength > 0.0) {
            return Err(Error::Config(format!("wavelength {wavelength} must be > 0")));
        }
        let m = subarray_map.iter().max().unwrap() + 1;
        if !n.is_multiple_of(m) {
            return Err(Error::Config(format!(
                "{m} RF chains do not evenly divide {n} elements"
            )));
        }
        let block = n / m;
        for (i, &chain) in subarray_map.iter().enumerate() {
            if chain != i / block {
                return Err(Error::Config(
                    "subarray map must assign contiguous equal-size blocks".into(),
                ));
            }
        }
        Ok(Self {
            element_positions,
            polarization_slant,
            subarray_map,
            wavelength,
        })
    }

    pub fn n_elements(&self) -> usize {
        self.element_positions.len()
    }

    pub fn n_rf_chains(&self) -> usize {
        self.subarray_map.last().map_or(0, |c| c + 1)
    }

    pub fn block_size(&self) -> usize {
        self.n_elements() / self.n_rf_chains()
    }

    /// Element index range feeding RF chain `m`.
    pub fn block_range(&self, m: usize) -> std::ops::Range<usize> {
        let b = self.block_size();
        m * b..(m + 1) * b
    }

    pub fn element_positions(&self) -> &[[f64; 3]] {
        &self.element_positions
    }

    pub fn polarization_slant(&self) -> &[f64] {
        &self.polarization_slant
    }

    pub fn subarray_map(&self) -> &[usize] {
        &self.subarray_map
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    /// Re-partitions the elements into `m_t` contiguous equal subarrays.
    pub fn with_rf_chains(mut self, m_t: usize) -> Result<Self> {
        let n = self.n_elements();
        if m_t == 0 || !n.is_multiple_of(m_t) {
            return Err(Error::Config(format!(
                "{m_t} RF chains do not evenly divide {n} elements"
            )));
        }
        let block = n / m_t;
        self.subarray_map = (0..n).map(|i| i / block).collect();
        Ok(self)
    }
}

/// Uniform linear array along the y-axis, geometric center at the origin,
/// endpoints at +-aperture/2; single-polarized, one RF chain per element.
pub fn place_ula(n_elements: usize, aperture: f64, wavelength: f64) -> Result<ArrayGeometry> {
    if n_elements == 0 {
        return Err(Error::Config("array needs at least one element".into()));
    }
    if !(aperture > 0.0) {
        return Err(Error::Config(format!("aperture {aperture} must be > 0")));
    }
    let positions = if n_elements == 1 {
        vec![[0.0, 0.0, 0.0]]
    } else {
        let spacing = aperture / (n_elements - 1) as f64;
        (0..n_elements)
            .map(|i| [0.0, -aperture / 2.0 + i as f64 * spacing, 0.0])
            .collect()
    };
    ArrayGeometry::new(
        positions,
        vec![0.0; n_elements],
        (0..n_elements).collect(),
        wavelength,
    )
}

/// Dual-polarized ULA: `n_pairs` co-located +-45 degree pairs spaced
/// `spacing` apart along the y-axis, partitioned into `m_t` subarrays.
pub fn place_dual_pol_ula(
    n_pairs: usize,
    spacing: f64,
    m_t: usize,
    wavelength: f64,
) -> Result<ArrayGeometry> {
    if n_pairs == 0 {
        return Err(Error::Config("array needs at least one pair".into()));
    }
    if !(spacing > 0.0) {
        return Err(Error::Config(format!("spacing {spacing} must be > 0")));
    }
    let mut positions = Vec::with_capacity(2 * n_pairs);
    let mut slants = Vec::with_capacity(2 * n_pairs);
    let mid = (n_pairs as f64 - 1.0) / 2.0;
    for p in 0..n_pairs {
        let y = (p as f64 - mid) * spacing;
        positions.push([0.0, y, 0.0]);
        slants.push(std::f64::consts::FRAC_PI_4);
        positions.push([0.0, y, 0.0]);
        slants.push(-std::f64::consts::FRAC_PI_4);
    }
    let n = 2 * n_pairs;
    ArrayGeometry::new(positions, slants, (0..n).collect(), wavelength)?.with_rf_chains(m_t)
}

/// Per-antenna pattern indices: the pattern-domain precoder.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PatternAssignment {
    indices: Vec<usize>,
}

impl PatternAssignment {
    pub fn new(indices: Vec<usize>, set: &PatternSet) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= set.cardinality()) {
            return Err(Error::Config(format!(
                "pattern index {bad} out of range for set of cardinality {}",
                set.cardinality()
            )));
        }
        Ok(Self { indices })
    }

    pub fn uniform(n_antennas: usize, index: usize) -> Self {
        Self {
            indices: vec![index; n_antennas],
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn get(&self, antenna: usize) -> usize {
        self.indices[antenna]
    }

    pub fn set(&mut self, antenna: usize, pattern: usize) {
        self.indices[antenna] = pattern;
    }
}

/// Clustered channel model parameters; defaults follow the urban macro
/// scenario the simulator targets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChannelModelParams {
    pub carrier_freq_hz: f64,
    pub bandwidth_hz: f64,
    pub n_subcarriers: usize,
    pub n_clusters: usize,
    pub azimuth_spread_deg: f64,
    pub elevation_spread_deg: f64,
    pub delay_spread_s: f64,
    /// Exponential power profile decay: cluster l carries a power
    /// proportional to exp(-decay * l / L).
    pub cluster_decay: f64,
    pub xpr_db: f64,
    pub penetration_loss_db: f64,
    pub noise_psd_dbm_hz: f64,
    pub min_distance_m: f64,
}

impl Default for ChannelModelParams {
    fn default() -> Self {
        Self {
            carrier_freq_hz: 3.0e9,
            bandwidth_hz: 20.0e6,
            n_subcarriers: 16,
            n_clusters: 12,
            azimuth_spread_deg: 25.0,
            elevation_spread_deg: 5.0,
            delay_spread_s: 300e-9,
            cluster_decay: 3.0,
            xpr_db: 8.0,
            penetration_loss_db: 20.0,
            noise_psd_dbm_hz: -174.0,
            min_distance_m: 35.0,
        }
    }
}

impl ChannelModelParams {
    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_freq_hz
    }

    /// AWGN power per subcarrier in watts.
    pub fn noise_power_per_subcarrier(&self) -> f64 {
        let psd_w = 10f64.powf((self.noise_psd_dbm_hz - 30.0) / 10.0);
        psd_w * self.bandwidth_hz / self.n_subcarriers as f64
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.carrier_freq_hz > 0.0 && self.bandwidth_hz > 0.0) {
            return Err(Error::Config("carrier frequency and bandwidth must be > 0".into()));
        }
        if self.n_subcarriers == 0 || self.n_clusters == 0 {
            return Err(Error::Config("subcarrier and cluster counts must be >= 1".into()));
        }
        Ok(())
    }
}

/// A drop-location record for one user equipment.
#[derive(Clone, Debug, PartialEq)]
pub struct Ue {
    pub position: [f64; 3],
    pub indoor: bool,
}

impl Ue {
    pub fn horizontal_distance(&self) -> f64 {
        (self.position[0] * self.position[0] + self.position[1] * self.position[1]).sqrt()
    }

    pub fn bearing(&self) -> f64 {
        self.position[1].atan2(self.position[0])
    }
}

/// Parses a plain-text UE table: one user per line, `x y z indoor`, with
/// `indoor` as 0/1; blank lines and `#` comments are skipped.
pub fn parse_ue_positions(text: &str) -> Result<Vec<Ue>> {
    let mut ues = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(Error::Config(format!(
                "line {}: expected 'x y z indoor', got {line:?}",
                ln + 1
            )));
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| Error::Config(format!("line {}: bad number {s:?}", ln + 1)))
        };
        let indoor = match fields[3] {
            "0" => false,
            "1" => true,
            other => {
                return Err(Error::Config(format!(
                    "line {}: indoor flag must be 0 or 1, got {other:?}",
                    ln + 1
                )))
            }
        };
        ues.push(Ue {
            position: [parse(fields[0])?, parse(fields[1])?, parse(fields[2])?],
            indoor,
        });
    }
    Ok(ues)
}

pub fn load_ue_positions(path: &Path) -> Result<Vec<Ue>> {
    let mut text = String::new();
    std::fs::File::open(path)?.read_to_string(&mut text)?;
    parse_ue_positions(&text)
}

/// Linear power attenuation (the multiplicative factor applied to channel
/// power, <= 1) from the 3GPP UMa NLoS path-loss law at 1.5 m UE height:
/// PL_dB = 13.54 + 39.08 log10(d) + 20 log10(f_GHz), plus a fixed
/// penetration loss for indoor users.
pub fn path_loss(distance_m: f64, indoor: bool, params: &ChannelModelParams) -> Result<f64> {
    if !(distance_m > 0.0) {
        return Err(Error::Domain(format!(
            "path loss undefined for distance {distance_m}"
        )));
    }
    let fc_ghz = params.carrier_freq_hz / 1e9;
    let mut pl_db = 13.54 + 39.08 * distance_m.log10() + 20.0 * fc_ghz.log10();
    if indoor {
        pl_db += params.penetration_loss_db;
    }
    Ok(10f64.powf(-pl_db / 10.0))
}

/// Free-space line-of-sight channel vector. Element n contributes
/// sqrt(g_n) * sqrt(A_REF / N_t) * lambda / (4 pi r_n) * exp(-j 2 pi r_n / lambda)
/// with r_n the element-to-receiver distance and g_n the pattern power gain
/// toward the receiver.
pub fn free_space_channel(
    geom: &ArrayGeometry,
    patterns: &[PatternSpec],
    rx: [f64; 3],
) -> Result<Vec<Complex64>> {
    let n = geom.n_elements();
    if patterns.len() != n {
        return Err(Error::Dimension(format!(
            "{} patterns for {n} elements",
            patterns.len()
        )));
    }
    let lambda = geom.wavelength();
    let area = (A_REF / n as f64).sqrt();
    let mut h = Vec::with_capacity(n);
    for (pos, spec) in geom.element_positions().iter().zip(patterns) {
        let d = [rx[0] - pos[0], rx[1] - pos[1], rx[2] - pos[2]];
        let r = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        if r < 1e-9 {
            return Err(Error::Domain(
                "receiver coincides with an array element".into(),
            ));
        }
        let dir = Direction::from_vector(d);
        let amp = spec.gain(&dir).sqrt() * area * lambda / (4.0 * std::f64::consts::PI * r);
        let phase = -2.0 * std::f64::consts::PI * r / lambda;
        h.push(Complex64::from_polar(amp, phase));
    }
    Ok(h)
}

/// One departure path of the clustered model.
#[derive(Clone, Debug)]
pub struct PathComponent {
    pub departure: Direction,
    /// Deterministic per-cluster power share; all shares sum to 1.
    pub power: f64,
    /// Complex small-scale gain, a circular Gaussian draw scaled by
    /// sqrt(power).
    pub gain: Complex64,
    pub delay_s: f64,
    /// Orientation of the path's field in the slant plane.
    pub pol_angle: f64,
    /// Cross-polar leakage coefficient; E|chi|^2 = 1 / XPR.
    pub cross_pol: Complex64,
}

impl PathComponent {
    /// Coupling of this path into an element with the given polarization
    /// slant.
    pub fn pol_coupling(&self, slant: f64) -> Complex64 {
        let d = slant - self.pol_angle;
        Complex64::new(d.cos(), 0.0) + self.cross_pol * d.sin()
    }
}

/// The multipath skeleton drawn for one user.
#[derive(Clone, Debug)]
pub struct ClusterSet {
    pub paths: Vec<PathComponent>,
}

/// Draws `params.n_clusters` departure paths around the line-of-sight
/// bearing: wrapped-Gaussian azimuths, Gaussian elevations, exponential
/// delays (earliest shifted to zero), and an exponential power profile
/// normalized to unit total power.
pub fn draw_clusters(
    params: &ChannelModelParams,
    los_azimuth: f64,
    rng: &mut ChaCha8Rng,
) -> ClusterSet {
    let l = params.n_clusters;
    let deg = std::f64::consts::PI / 180.0;
    let mut weights: Vec<f64> = (0..l)
        .map(|i| (-params.cluster_decay * i as f64 / l as f64).exp())
        .collect();
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }

    let xpr = 10f64.powf(params.xpr_db / 10.0);
    let mut delays: Vec<f64> = (0..l)
        .map(|_| {
            let u: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
            -params.delay_spread_s * u.ln()
        })
        .collect();
    let min_delay = delays.iter().cloned().fold(f64::INFINITY, f64::min);
    for d in &mut delays {
        *d -= min_delay;
    }

    let mut paths = Vec::with_capacity(l);
    for (i, &power) in weights.iter().enumerate() {
        let az_off: f64 = rng.sample::<f64, _>(StandardNormal) * params.azimuth_spread_deg * deg;
        let el: f64 = rng.sample::<f64, _>(StandardNormal) * params.elevation_spread_deg * deg;
        let departure = Direction::wrapped(los_azimuth + az_off, el);
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        let gain = Complex64::new(re, im) / 2f64.sqrt() * power.sqrt();
        let pol_angle = (rng.random::<f64>() - 0.5) * 2.0 * std::f64::consts::PI;
        let xre: f64 = rng.sample(StandardNormal);
        let xim: f64 = rng.sample(StandardNormal);
        let cross_pol = Complex64::new(xre, xim) / 2f64.sqrt() / xpr.sqrt();
        paths.push(PathComponent {
            departure,
            power,
            gain,
            delay_s: delays[i],
            pol_angle,
            cross_pol,
        });
    }
    ClusterSet { paths }
}

/// Pattern-indexed channel of a single user: entry `(k, n, p)` is the
/// channel coefficient on subcarrier k at antenna n if that antenna uses
/// pattern p.
#[derive(Clone, Debug, PartialEq)]
pub struct UserChannel {
    n_subcarriers: usize,
    n_elements: usize,
    n_patterns: usize,
    table: Vec<Complex64>,
}

impl UserChannel {
    #[inline]
    pub fn entry(&self, k: usize, n: usize, p: usize) -> Complex64 {
        self.table[(k * self.n_elements + n) * self.n_patterns + p]
    }
}

/// Assembles a user's pattern-indexed channel table from a drawn cluster
/// set and a linear path-loss factor. Deterministic; exposed separately so
/// regression tests can feed hand-built cluster sets.
pub fn assemble_user_channel(
    params: &ChannelModelParams,
    geom: &ArrayGeometry,
    set: &PatternSet,
    clusters: &ClusterSet,
    path_loss_linear: f64,
) -> UserChannel {
    let n = geom.n_elements();
    let k_count = params.n_subcarriers;
    let p_count = set.cardinality();
    let l_count = clusters.paths.len();
    let lambda = geom.wavelength();
    let amp = path_loss_linear.sqrt();
    let df = params.bandwidth_hz / k_count as f64;

    // sqrt pattern gain per (path, pattern)
    let mut sqrt_gain = vec![0.0f64; l_count * p_count];
    // spatial phase and polarization coupling per (path, element)
    let mut spatial = vec![Complex64::ZERO; l_count * n];
    // frequency rotation per (path, subcarrier)
    let mut freq = vec![Complex64::ZERO; l_count * k_count];

    for (l, path) in clusters.paths.iter().enumerate() {
        for p in 0..p_count {
            sqrt_gain[l * p_count + p] = set.get(p).gain(&path.departure).sqrt();
        }
        let wave = path.departure.unit_vector();
        for (e, pos) in geom.element_positions().iter().enumerate() {
            let proj = wave[0] * pos[0] + wave[1] * pos[1] + wave[2] * pos[2];
            let phase = 2.0 * std::f64::consts::PI * proj / lambda;
            let coupling = path.pol_coupling(geom.polarization_slant()[e]);
            spatial[l * n + e] = path.gain * coupling * Complex64::from_polar(1.0, phase);
        }
        for k in 0..k_count {
            let f_k = (k as f64 - (k_count as f64 - 1.0) / 2.0) * df;
            freq[l * k_count + k] =
                Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * f_k * path.delay_s);
        }
    }

    let mut table = vec![Complex64::ZERO; k_count * n * p_count];
    for k in 0..k_count {
        for e in 0..n {
            for p in 0..p_count {
                let mut acc = Complex64::ZERO;
                for l in 0..l_count {
                    acc += spatial[l * n + e] * sqrt_gain[l * p_count + p] * freq[l * k_count + k];
                }
                table[(k * n + e) * p_count + p] = acc * amp;
            }
        }
    }
    UserChannel {
        n_subcarriers: k_count,
        n_elements: n,
        n_patterns: p_count,
        table,
    }
}

/// Draws the clustered channel of one user. Deterministic in `seed`.
pub fn cluster_channel(
    params: &ChannelModelParams,
    geom: &ArrayGeometry,
    set: &PatternSet,
    ue: &Ue,
    seed: u64,
) -> Result<UserChannel> {
    params.validate()?;
    let distance = ue.horizontal_distance();
    if !(distance > 0.0) {
        return Err(Error::Config(
            "user may not be co-located with the base station".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let clusters = draw_clusters(params, ue.bearing(), &mut rng);
    let pl = path_loss(distance, ue.indoor, params)?;
    Ok(assemble_user_channel(params, geom, set, &clusters, pl))
}

/// All users' pattern-indexed channels for one Monte Carlo drop, plus the
/// metadata needed to reproduce them.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelRealization {
    n_users: usize,
    n_subcarriers: usize,
    n_elements: usize,
    n_patterns: usize,
    users: Vec<Ue>,
    user_channels: Vec<UserChannel>,
    pub noise_power: f64,
    pub seed: u64,
}

impl ChannelRealization {
    /// Generates every user's channel with per-user seeds derived from
    /// `base_seed`; byte-identical for identical inputs.
    pub fn generate(
        params: &ChannelModelParams,
        geom: &ArrayGeometry,
        set: &PatternSet,
        ues: &[Ue],
        base_seed: u64,
    ) -> Result<Self> {
        if ues.is_empty() {
            return Err(Error::Config("at least one user is required".into()));
        }
        let user_channels: Vec<UserChannel> = ues
            .iter()
            .enumerate()
            .map(|(u, ue)| cluster_channel(params, geom, set, ue, derive_seed(base_seed, u as u64)))
            .collect::<Result<_>>()?;
        Ok(Self {
            n_users: ues.len(),
            n_subcarriers: params.n_subcarriers,
            n_elements: geom.n_elements(),
            n_patterns: set.cardinality(),
            users: ues.to_vec(),
            user_channels,
            noise_power: params.noise_power_per_subcarrier(),
            seed: base_seed,
        })
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn n_subcarriers(&self) -> usize {
        self.n_subcarriers
    }

    pub fn n_elements(&self) -> usize {
        self.n_elements
    }

    pub fn n_patterns(&self) -> usize {
        self.n_patterns
    }

    pub fn users(&self) -> &[Ue] {
        &self.users
    }

    pub fn user_channel(&self, u: usize) -> &UserChannel {
        &self.user_channels[u]
    }

    /// Conjugated channel rows of the scheduled users on subcarrier `k`
    /// under the given pattern assignment: row u is h_u^H, so products with
    /// precoding vectors are received amplitudes.
    pub fn channel_matrix(
        &self,
        scheduled: &[usize],
        k: usize,
        assignment: &PatternAssignment,
    ) -> DMatrix<Complex64> {
        assert_eq!(assignment.len(), self.n_elements, "assignment length");
        DMatrix::from_fn(scheduled.len(), self.n_elements, |row, col| {
            self.user_channels[scheduled[row]]
                .entry(k, col, assignment.get(col))
                .conj()
        })
    }

    /// Channel matrices of all subcarriers.
    pub fn channel_matrices(
        &self,
        scheduled: &[usize],
        assignment: &PatternAssignment,
    ) -> Vec<DMatrix<Complex64>> {
        (0..self.n_subcarriers)
            .map(|k| self.channel_matrix(scheduled, k, assignment))
            .collect()
    }

    /// Versioned binary dump; complex entries are stored as little-endian
    /// (real, imaginary) f64 pairs in (user, subcarrier, element, pattern)
    /// order.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(b"RMCH");
        out.extend_from_slice(&1u32.to_le_bytes());
        for dim in [
            self.n_users as u32,
            self.n_subcarriers as u32,
            self.n_elements as u32,
            self.n_patterns as u32,
        ] {
            out.extend_from_slice(&dim.to_le_bytes());
        }
        out.extend_from_slice(&self.seed.to_le_bytes());
        out.extend_from_slice(&self.noise_power.to_le_bytes());
        for ue in &self.users {
            for c in ue.position {
                out.extend_from_slice(&c.to_le_bytes());
            }
            out.push(ue.indoor as u8);
        }
        for uc in &self.user_channels {
            for v in &uc.table {
                out.extend_from_slice(&v.re.to_le_bytes());
                out.extend_from_slice(&v.im.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut cur = Cursor { bytes, pos: 0 };
        if cur.take(4)? != b"RMCH" {
            return Err(Error::Dump("bad magic".into()));
        }
        let version = cur.u32()?;
        if version != 1 {
            return Err(Error::Dump(format!("unsupported version {version}")));
        }
        let n_users = cur.u32()? as usize;
        let n_subcarriers = cur.u32()? as usize;
        let n_elements = cur.u32()? as usize;
        let n_patterns = cur.u32()? as usize;
        let seed = cur.u64()?;
        let noise_power = cur.f64()?;
        let mut users = Vec::with_capacity(n_users);
        for _ in 0..n_users {
            let position = [cur.f64()?, cur.f64()?, cur.f64()?];
            let indoor = cur.take(1)?[0] != 0;
            users.push(Ue { position, indoor });
        }
        let per_user = n_subcarriers * n_elements * n_patterns;
        let mut user_channels = Vec::with_capacity(n_users);
        for _ in 0..n_users {
            let mut table = Vec::with_capacity(per_user);
            for _ in 0..per_user {
                table.push(Complex64::new(cur.f64()?, cur.f64()?));
            }
            user_channels.push(UserChannel {
                n_subcarriers,
                n_elements,
                n_patterns,
                table,
            });
        }
        if cur.pos != bytes.len() {
            return Err(Error::Dump("trailing bytes".into()));
        }
        Ok(Self {
            n_users,
            n_subcarriers,
            n_elements,
            n_patterns,
            users,
            user_channels,
            noise_power,
            seed,
        })
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::Dump("truncated dump".into()));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}
