//! Network descriptions and their tight-binding Hamiltonians.
//!
//! Two topologies are supported. The extended star has a trapping core joined
//! to `N` linear branches of `L` sites each, with an energy defect on every
//! branch tip. The asymmetric chain has `L + 1` sites: the trap at `s = 0`,
//! a bond of strength `J sqrt(N)` to site 1, uniform bonds `J` further out and
//! the defect at `s = L`.
//!
//! Flat site indices put the trap (core) at 0. Star sites follow branch-major,
//! position-minor order: `(b, s) -> 1 + (b - 1) L + (s - 1)`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config;
use crate::error::{Error, Result};
use crate::liouville::DensityMatrix;

pub type C64 = Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NetworkKind {
    #[serde(rename = "star")]
    ExtendedStar,
    #[serde(rename = "chain")]
    AsymmetricChain,
}

impl NetworkKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NetworkKind::ExtendedStar => "star",
            NetworkKind::AsymmetricChain => "chain",
        }
    }
}

impl fmt::Display for NetworkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NetworkKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "star" | "extended-star" | "extendedstar" | "extended_star" => Ok(NetworkKind::ExtendedStar),
            "chain" | "asymmetric-chain" | "asymmetricchain" | "asymmetric_chain" => {
                Ok(NetworkKind::AsymmetricChain)
            }
            other => Err(Error::Config(format!("unknown network kind `{other}`"))),
        }
    }
}

/// Immutable description of one network. Energies are in units of the
/// hopping constant when `hopping = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub kind: NetworkKind,
    /// Number of star branches. For the chain it only enters through the
    /// `J sqrt(N)` trap bond.
    pub branches: usize,
    /// Sites per branch (star) or chain body length (chain).
    pub length: usize,
    pub hopping: f64,
    pub defect: f64,
    pub trap_rate: f64,
    pub site_energy: f64,
}

impl NetworkSpec {
    pub const DEFAULT_TRAP_RATE: f64 = 0.1;

    pub fn new(kind: NetworkKind, branches: usize, length: usize) -> Self {
        NetworkSpec {
            kind,
            branches,
            length,
            hopping: 1.0,
            defect: 0.0,
            trap_rate: Self::DEFAULT_TRAP_RATE,
            site_energy: 0.0,
        }
    }

    pub fn star(branches: usize, length: usize) -> Self {
        Self::new(NetworkKind::ExtendedStar, branches, length)
    }

    pub fn chain(branches: usize, length: usize) -> Self {
        Self::new(NetworkKind::AsymmetricChain, branches, length)
    }

    pub fn with_defect(mut self, defect: f64) -> Self {
        self.defect = defect;
        self
    }

    pub fn with_trap_rate(mut self, trap_rate: f64) -> Self {
        self.trap_rate = trap_rate;
        self
    }

    pub fn with_hopping(mut self, hopping: f64) -> Self {
        self.hopping = hopping;
        self
    }

    pub fn with_site_energy(mut self, site_energy: f64) -> Self {
        self.site_energy = site_energy;
        self
    }

    pub fn is_star(&self) -> bool {
        self.kind == NetworkKind::ExtendedStar
    }

    /// `1 + N L` for the star, `1 + L` for the chain.
    pub fn total_sites(&self) -> usize {
        match self.kind {
            NetworkKind::ExtendedStar => 1 + self.branches * self.length,
            NetworkKind::AsymmetricChain => 1 + self.length,
        }
    }

    /// The defect amplitude `sqrt(N - 1) J` that minimises the absorption time
    /// in the coherent regime.
    pub fn optimal_defect(&self) -> f64 {
        ((self.branches as f64) - 1.0).max(0.0).sqrt() * self.hopping
    }

    pub fn validate(&self) -> Result<()> {
        if self.branches == 0 {
            return Err(Error::InvalidSpec("number of branches N must be positive".into()));
        }
        if self.length == 0 {
            return Err(Error::InvalidSpec("length L must be positive".into()));
        }
        if !(self.hopping.is_finite() && self.hopping > 0.0) {
            return Err(Error::InvalidSpec(format!("hopping J must be positive, got {}", self.hopping)));
        }
        if !(self.trap_rate.is_finite() && self.trap_rate >= 0.0) {
            return Err(Error::InvalidSpec(format!(
                "trap rate must be non-negative, got {}",
                self.trap_rate
            )));
        }
        if !self.defect.is_finite() || !self.site_energy.is_finite() {
            return Err(Error::InvalidSpec("defect and site energy must be finite".into()));
        }
        Ok(())
    }

    pub(crate) fn require_star(&self) -> Result<()> {
        if self.is_star() {
            Ok(())
        } else {
            Err(Error::WrongKind { expected: "star", found: self.kind.as_str() })
        }
    }

    /// Renders the spec as a flat key-value block with keys
    /// `kind, N, L, J, delta, gamma_trap, eps0`.
    pub fn to_config(&self) -> String {
        format!(
            "kind = {}\nN = {}\nL = {}\nJ = {}\ndelta = {}\ngamma_trap = {}\neps0 = {}\n",
            self.kind, self.branches, self.length, self.hopping, self.defect, self.trap_rate, self.site_energy
        )
    }

    /// Parses a block written by [`NetworkSpec::to_config`]. `kind`, `N` and
    /// `L` are required; the rest default to `J = 1`, `delta = 0`,
    /// `gamma_trap = 0.1`, `eps0 = 0`. Unknown keys are rejected.
    pub fn from_config(text: &str) -> Result<Self> {
        let map = config::parse_block(text)?;
        Self::from_config_map(&map, true)
    }

    pub(crate) fn from_config_map(
        map: &std::collections::BTreeMap<String, String>,
        strict: bool,
    ) -> Result<Self> {
        const KEYS: [&str; 7] = ["kind", "N", "L", "J", "delta", "gamma_trap", "eps0"];
        if strict {
            if let Some(k) = map.keys().find(|k| !KEYS.contains(&k.as_str())) {
                return Err(Error::Config(format!("unknown key `{k}`")));
            }
        }
        let need = |k: &str| map.get(k).ok_or_else(|| Error::Config(format!("missing key `{k}`")));
        let kind: NetworkKind = need("kind")?.parse()?;
        let branches = config::parse_value("N", need("N")?)?;
        let length = config::parse_value("L", need("L")?)?;
        let mut spec = NetworkSpec::new(kind, branches, length);
        if let Some(v) = map.get("J") {
            spec.hopping = config::parse_value("J", v)?;
        }
        if let Some(v) = map.get("delta") {
            spec.defect = config::parse_value("delta", v)?;
        }
        if let Some(v) = map.get("gamma_trap") {
            spec.trap_rate = config::parse_value("gamma_trap", v)?;
        }
        if let Some(v) = map.get("eps0") {
            spec.site_energy = config::parse_value("eps0", v)?;
        }
        spec.validate()?;
        Ok(spec)
    }
}

/// A site of either network. Branches and positions are 1-based; the trap
/// is the star core or chain site 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SiteIndex {
    Core,
    Branch { branch: usize, position: usize },
    Chain(usize),
}

impl SiteIndex {
    pub fn flat(self, spec: &NetworkSpec) -> Option<usize> {
        match (spec.kind, self) {
            (_, SiteIndex::Core) | (NetworkKind::AsymmetricChain, SiteIndex::Chain(0)) => Some(0),
            (NetworkKind::ExtendedStar, SiteIndex::Branch { branch, position })
                if (1..=spec.branches).contains(&branch) && (1..=spec.length).contains(&position) =>
            {
                Some(1 + (branch - 1) * spec.length + (position - 1))
            }
            (NetworkKind::AsymmetricChain, SiteIndex::Chain(s)) if s <= spec.length => Some(s),
            _ => None,
        }
    }

    pub fn from_flat(spec: &NetworkSpec, index: usize) -> Option<Self> {
        if index >= spec.total_sites() {
            return None;
        }
        Some(match (spec.kind, index) {
            (NetworkKind::ExtendedStar, 0) => SiteIndex::Core,
            (NetworkKind::ExtendedStar, i) => SiteIndex::Branch {
                branch: 1 + (i - 1) / spec.length,
                position: 1 + (i - 1) % spec.length,
            },
            (NetworkKind::AsymmetricChain, i) => SiteIndex::Chain(i),
        })
    }

    /// Sites carrying the energy defect, i.e. where the exciton starts.
    pub fn defect_sites(spec: &NetworkSpec) -> Vec<SiteIndex> {
        match spec.kind {
            NetworkKind::ExtendedStar => (1..=spec.branches)
                .map(|branch| SiteIndex::Branch { branch, position: spec.length })
                .collect(),
            NetworkKind::AsymmetricChain => vec![SiteIndex::Chain(spec.length)],
        }
    }
}

/// Complex-symmetric tight-binding Hamiltonian. The only non-Hermitian entry
/// is the trap self-energy `eps0 - i Gamma / 2` at flat index 0.
#[derive(Clone, Debug)]
pub struct Hamiltonian {
    pub matrix: Array2<C64>,
    pub spec: NetworkSpec,
}

impl Hamiltonian {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

pub fn build_hamiltonian(spec: &NetworkSpec) -> Result<Hamiltonian> {
    spec.validate()?;
    let n = spec.total_sites();
    let j = spec.hopping;
    let mut h = Array2::<C64>::zeros((n, n));
    let mut couple = |a: usize, b: usize, v: f64| {
        h[[a, b]] = C64::new(v, 0.0);
        h[[b, a]] = C64::new(v, 0.0);
    };
    match spec.kind {
        NetworkKind::ExtendedStar => {
            let l = spec.length;
            for b in 0..spec.branches {
                let first = 1 + b * l;
                couple(0, first, j);
                for s in 0..l - 1 {
                    couple(first + s, first + s + 1, j);
                }
            }
        }
        NetworkKind::AsymmetricChain => {
            couple(0, 1, j * (spec.branches as f64).sqrt());
            for s in 1..spec.length {
                couple(s, s + 1, j);
            }
        }
    }
    for i in 0..n {
        h[[i, i]] = C64::new(spec.site_energy, 0.0);
    }
    h[[0, 0]] -= C64::new(0.0, 0.5 * spec.trap_rate);
    for site in SiteIndex::defect_sites(spec) {
        let i = site.flat(spec).expect("defect site in range");
        h[[i, i]] += spec.defect;
    }
    Ok(Hamiltonian { matrix: h, spec: *spec })
}

/// Uniform superposition over the defect sites: `(1/sqrt N) sum_b |b, L>` on
/// the star, `|L>` on the chain.
pub fn initial_state(spec: &NetworkSpec) -> Result<DensityMatrix> {
    spec.validate()?;
    let sites = SiteIndex::defect_sites(spec);
    let amp = C64::new(1.0 / (sites.len() as f64).sqrt(), 0.0);
    let mut psi = Array1::<C64>::zeros(spec.total_sites());
    for site in sites {
        psi[site.flat(spec).expect("defect site in range")] = amp;
    }
    Ok(DensityMatrix::pure(&psi, *spec))
}

/// The chain whose dynamics equals the star's totally symmetric (`k = N`)
/// Bloch sector.
pub fn star_to_chain(spec: &NetworkSpec) -> Result<NetworkSpec> {
    spec.require_star()?;
    spec.validate()?;
    Ok(NetworkSpec { kind: NetworkKind::AsymmetricChain, ..*spec })
}

/// Bloch states of the star, `chi_s^(k) = N^{-1/2} sum_b exp(-i k b theta) |b, s>`
/// with `theta = 2 pi / N`.
#[derive(Clone, Debug)]
pub struct BlochBasis {
    spec: NetworkSpec,
}

impl BlochBasis {
    pub fn new(spec: &NetworkSpec) -> Result<Self> {
        spec.require_star()?;
        spec.validate()?;
        Ok(BlochBasis { spec: *spec })
    }

    pub fn angle(&self) -> f64 {
        2.0 * PI / self.spec.branches as f64
    }

    /// Coefficients of `chi_s^(k)` over the star's flat site indices.
    /// `k` runs over `1..=N`, `s` over `1..=L`.
    pub fn state(&self, k: usize, s: usize) -> Array1<C64> {
        let n = self.spec.branches;
        assert!((1..=n).contains(&k) && (1..=self.spec.length).contains(&s));
        let norm = 1.0 / (n as f64).sqrt();
        let mut v = Array1::<C64>::zeros(self.spec.total_sites());
        for b in 1..=n {
            let idx = SiteIndex::Branch { branch: b, position: s }.flat(&self.spec).unwrap();
            let phase = -((k * b) as f64) * self.angle();
            v[idx] = C64::from_polar(norm, phase);
        }
        v
    }

    /// Unitary whose columns are the new basis: core first, then block `k = N`
    /// (positions 1..L), then blocks `k = 1..N-1`. Conjugating the star
    /// Hamiltonian by it gives the `k = N` block (with the core) in the
    /// leading `(L + 1) x (L + 1)` corner followed by the `N - 1` uncoupled
    /// blocks.
    pub fn unitary(&self) -> Array2<C64> {
        let ns = self.spec.total_sites();
        let mut u = Array2::<C64>::zeros((ns, ns));
        u[[0, 0]] = C64::new(1.0, 0.0);
        let mut col = 1;
        for k in self.block_order() {
            for s in 1..=self.spec.length {
                u.column_mut(col).assign(&self.state(k, s));
                col += 1;
            }
        }
        u
    }

    fn block_order(&self) -> impl Iterator<Item = usize> {
        let n = self.spec.branches;
        std::iter::once(n).chain(1..n)
    }

    /// Analytic block Hamiltonian `H^(k)`. For `k = N` the core is included
    /// as the first row/column and the core bond is `sqrt(N) J`; all other
    /// blocks are `L x L` without trap coupling.
    pub fn block_hamiltonian(&self, k: usize) -> Array2<C64> {
        let spec = &self.spec;
        let l = spec.length;
        let with_core = k == spec.branches;
        let offset = usize::from(with_core);
        let dim = l + offset;
        let mut h = Array2::<C64>::zeros((dim, dim));
        for s in 0..l {
            h[[offset + s, offset + s]] = C64::new(spec.site_energy, 0.0);
            if s + 1 < l {
                h[[offset + s, offset + s + 1]] = C64::new(spec.hopping, 0.0);
                h[[offset + s + 1, offset + s]] = C64::new(spec.hopping, 0.0);
            }
        }
        h[[dim - 1, dim - 1]] += spec.defect;
        if with_core {
            h[[0, 0]] = C64::new(spec.site_energy, -0.5 * spec.trap_rate);
            let bond = C64::new((spec.branches as f64).sqrt() * spec.hopping, 0.0);
            h[[0, 1]] = bond;
            h[[1, 0]] = bond;
        }
        h
    }
}
