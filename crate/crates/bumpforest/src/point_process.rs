//! Layered Poisson point-process configurations on `[0,1]` and the bump map.
//!
//! A configuration holds atoms `(location, layer)` with the first
//! `sampled_depth` layers realized; deeper layers can be filled in lazily with
//! [`extend_depth`]. Layer `k` of a configuration is always drawn from
//! `stream.substream(k)`, which makes extending in several steps identical to
//! extending in one.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Poisson};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PointProcessError {
    #[error("intensity {0} outside (0, 1]")]
    InvalidIntensity(f64),
    #[error("requested depth {requested} does not exceed current depth {current}")]
    InvalidDepth { current: u32, requested: u32 },
    #[error("atom not present in configuration")]
    AtomNotFound,
    #[error("bumped atom must be in layer 0, found layer {0}")]
    NotLayerZero(u32),
    #[error("invalid atom set: {0}")]
    InvalidAtoms(String),
}

/// A single point of the configuration: a location in `(0,1]` and the index
/// of the layer it lives in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub location: f64,
    pub layer: u32,
}

impl Serialize for Atom {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        (self.location, self.layer).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Atom {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let (location, layer) = <(f64, u32)>::deserialize(deserializer)?;
        if !(location > 0.0 && location <= 1.0) {
            return Err(D::Error::custom("atom location outside (0, 1]"));
        }
        Ok(Atom { location, layer })
    }
}

/// A reproducible random stream: `(seed, stream_id)` fully determines the
/// draws. Substreams are derived deterministically, so a stream can hand out
/// independent generators per layer, per trial, or per worker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
}

fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        RngStream { seed, stream_id }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Derives a child stream. Distinct indices give (statistically) disjoint
    /// streams; the derivation is pure, so plans can be replayed.
    pub fn substream(&self, index: u64) -> RngStream {
        RngStream {
            seed: self.seed,
            stream_id: splitmix64(self.stream_id.rotate_left(17) ^ splitmix64(index)),
        }
    }

    pub fn rng(&self) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// A point-process configuration: location-sorted atoms, the number of layers
/// realized so far, and the per-layer intensity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Configuration {
    alpha: f64,
    sampled_depth: u32,
    atoms: Vec<Atom>,
}

fn check_alpha(alpha: f64) -> Result<(), PointProcessError> {
    if alpha.is_finite() && alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(PointProcessError::InvalidIntensity(alpha))
    }
}

impl Configuration {
    /// Configuration with no layers realized yet.
    pub fn empty(alpha: f64) -> Result<Self, PointProcessError> {
        check_alpha(alpha)?;
        Ok(Configuration {
            alpha,
            sampled_depth: 0,
            atoms: Vec::new(),
        })
    }

    /// Samples layers `0..depth`, layer `k` from `stream.substream(k)`.
    pub fn sample(alpha: f64, depth: u32, stream: &RngStream) -> Result<Self, PointProcessError> {
        let base = Configuration::empty(alpha)?;
        if depth == 0 {
            return Ok(base);
        }
        extend_depth(&base, depth, stream)
    }

    /// Builds a configuration from explicit atoms (sorted internally).
    pub fn from_atoms(
        alpha: f64,
        sampled_depth: u32,
        mut atoms: Vec<Atom>,
    ) -> Result<Self, PointProcessError> {
        check_alpha(alpha)?;
        atoms.sort_by(|a, b| a.location.total_cmp(&b.location));
        for pair in atoms.windows(2) {
            if pair[0].location == pair[1].location {
                return Err(PointProcessError::InvalidAtoms(format!(
                    "duplicate location {}",
                    pair[0].location
                )));
            }
        }
        for a in &atoms {
            if !(a.location > 0.0 && a.location <= 1.0) {
                return Err(PointProcessError::InvalidAtoms(format!(
                    "location {} outside (0, 1]",
                    a.location
                )));
            }
            if a.layer >= sampled_depth {
                return Err(PointProcessError::InvalidAtoms(format!(
                    "layer {} not below sampled depth {}",
                    a.layer, sampled_depth
                )));
            }
        }
        Ok(Configuration {
            alpha,
            sampled_depth,
            atoms,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn sampled_depth(&self) -> u32 {
        self.sampled_depth
    }

    /// Atoms in location order.
    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Indices (into `atoms`) of the layer-0 atoms, the bumpable ones.
    pub fn layer_zero_indices(&self) -> Vec<usize> {
        self.atoms
            .iter()
            .enumerate()
            .filter(|(_, a)| a.layer == 0)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("configuration serializes")
    }

    pub(crate) fn insert_atom(&mut self, atom: Atom) {
        let pos = self.atoms.partition_point(|a| a.location < atom.location);
        self.atoms.insert(pos, atom);
    }

    pub(crate) fn set_sampled_depth(&mut self, depth: u32) {
        self.sampled_depth = depth;
    }
}

/// Draws `count` locations uniform on `(0,1]`, redrawing any draw that
/// collides with `taken` (kept sorted; new locations are added to it).
pub(crate) fn draw_locations(
    count: usize,
    rng: &mut dyn RngCore,
    taken: &mut Vec<f64>,
) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        loop {
            let x = 1.0 - rng.random::<f64>();
            let pos = taken.partition_point(|&t| t < x);
            if taken.get(pos) == Some(&x) {
                continue; // collision: redraw
            }
            taken.insert(pos, x);
            out.push(x);
            break;
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

pub(crate) fn poisson_count(alpha: f64, rng: &mut impl Rng) -> usize {
    let dist = Poisson::new(alpha).expect("alpha validated");
    dist.sample(rng) as usize
}

/// Samples one Poisson(`alpha`) layer: a sorted list of atom locations.
pub fn sample_layer(alpha: f64, stream: &RngStream) -> Result<Vec<f64>, PointProcessError> {
    check_alpha(alpha)?;
    let mut rng = stream.rng();
    let count = poisson_count(alpha, &mut rng);
    let mut taken = Vec::new();
    Ok(draw_locations(count, &mut rng, &mut taken))
}

/// Realizes layers `c.sampled_depth..new_depth` and merges them in. Existing
/// atoms are untouched; layer `k` comes from `stream.substream(k)`.
pub fn extend_depth(
    c: &Configuration,
    new_depth: u32,
    stream: &RngStream,
) -> Result<Configuration, PointProcessError> {
    if new_depth <= c.sampled_depth {
        return Err(PointProcessError::InvalidDepth {
            current: c.sampled_depth,
            requested: new_depth,
        });
    }
    let mut atoms = c.atoms.clone();
    let mut taken: Vec<f64> = atoms.iter().map(|a| a.location).collect();
    for layer in c.sampled_depth..new_depth {
        let mut rng = stream.substream(layer as u64).rng();
        let count = poisson_count(c.alpha, &mut rng);
        for x in draw_locations(count, &mut rng, &mut taken) {
            atoms.push(Atom { location: x, layer });
        }
    }
    atoms.sort_by(|a, b| a.location.total_cmp(&b.location));
    Ok(Configuration {
        alpha: c.alpha,
        sampled_depth: new_depth,
        atoms,
    })
}

/// The bump map: removes the layer-0 atom `x`, drops every atom strictly left
/// of it one layer (discarding those leaving layer 0), and leaves atoms to
/// the right untouched. The sampled depth shrinks by one because the left
/// side now exposes what used to be one layer deeper.
pub fn bump(c: &Configuration, x: Atom) -> Result<Configuration, PointProcessError> {
    let idx = c
        .atoms
        .iter()
        .position(|a| a.location == x.location && a.layer == x.layer)
        .ok_or(PointProcessError::AtomNotFound)?;
    if x.layer != 0 {
        return Err(PointProcessError::NotLayerZero(x.layer));
    }
    bump_at(c, idx)
}

/// [`bump`] addressed by index into `c.atoms()`.
pub fn bump_at(c: &Configuration, idx: usize) -> Result<Configuration, PointProcessError> {
    let x = *c.atoms.get(idx).ok_or(PointProcessError::AtomNotFound)?;
    if x.layer != 0 {
        return Err(PointProcessError::NotLayerZero(x.layer));
    }
    let mut atoms = Vec::with_capacity(c.atoms.len().saturating_sub(1));
    for (i, a) in c.atoms.iter().enumerate() {
        if i == idx {
            continue;
        }
        if a.location < x.location {
            if a.layer > 0 {
                atoms.push(Atom {
                    location: a.location,
                    layer: a.layer - 1,
                });
            }
        } else {
            atoms.push(*a);
        }
    }
    Ok(Configuration {
        alpha: c.alpha,
        sampled_depth: c.sampled_depth.saturating_sub(1),
        atoms,
    })
}
