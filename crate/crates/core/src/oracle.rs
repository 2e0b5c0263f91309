//! Exact exhaustive combinatorics at desk scale.
//!
//! Everything here manipulates subsets of `{1..N}` as `u32` bitmasks (bit
//! `i` is element `i + 1`) and enumerates the whole subset lattice, so the
//! answers are ground truth rather than estimates. Budgets are enforced by
//! explicit errors: `N <= 20` for cone enumeration, `N <= 9` for condition
//! checking and copy search.
//!
//! Parameters are free integers. The divisibility-by-60 regime of the
//! asymptotic argument exists only to make fractions integral; small
//! instances pick their own integral sizes.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Subset of `{1..N}` as a bitmask; bit `i` holds element `i + 1`.
pub type SetMask = u32;

pub const ENUMERATION_CAP: u32 = 20;
pub const CONDITION_CAP: u32 = 9;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("ground set size {n} exceeds the exhaustive budget {cap}")]
    TooLarge { n: u32, cap: u32 },
    #[error("set {mask:#b} is not a subset of the ground set of size {n}")]
    NotASubset { mask: SetMask, n: u32 },
    #[error("family member {member:?} does not have the declared level {level}")]
    LevelMismatch { member: Vec<u32>, level: u32 },
    #[error("size parameter {value} exceeds the ground set size {n}")]
    SizeOutOfRange { value: u32, n: u32 },
    #[error(
        "not an embedding: sources {source_a:?} and {source_b:?} map to \
         images {image_a:?}, {image_b:?} violating order preservation"
    )]
    NotAnEmbedding {
        source_a: Vec<u32>,
        source_b: Vec<u32>,
        image_a: Vec<u32>,
        image_b: Vec<u32>,
    },
    #[error("no anchor element available for coordinate {coordinate}")]
    NormalizationFailed { coordinate: u32 },
    #[error("thresholds {0:?} are not strictly increasing within the cube")]
    BadThresholds([u32; 5]),
    #[error("family levels ({0}, {1}, {2}, {3}) are not complementary in N = {4}")]
    BadFamilyLevels(u32, u32, u32, u32, u32),
}

pub fn mask_from_elems(elems: &[u32]) -> SetMask {
    elems.iter().fold(0, |m, &e| {
        assert!((1..=32).contains(&e), "element out of range");
        m | 1 << (e - 1)
    })
}

pub fn elems_from_mask(mask: SetMask) -> Vec<u32> {
    (0..32).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).collect()
}

fn full_mask(n: u32) -> SetMask {
    if n == 32 {
        u32::MAX
    } else {
        (1 << n) - 1
    }
}

fn check_subset(mask: SetMask, n: u32) -> Result<(), OracleError> {
    if mask & !full_mask(n) != 0 {
        return Err(OracleError::NotASubset { mask, n });
    }
    Ok(())
}

/// Subsets of `{1..N}` of the given size, in increasing mask order.
fn level_sets(n: u32, size: u32) -> impl Iterator<Item = SetMask> {
    (0..=full_mask(n)).filter(move |m| m.count_ones() == size)
}

/// A family of same-size subsets of `{1..N}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetFamily {
    members: Vec<SetMask>,
    level: u32,
}

impl SetFamily {
    pub fn new(members: Vec<SetMask>, level: u32) -> Result<Self, OracleError> {
        let mut members = members;
        members.sort_unstable();
        members.dedup();
        for &m in &members {
            if m.count_ones() != level {
                return Err(OracleError::LevelMismatch {
                    member: elems_from_mask(m),
                    level,
                });
            }
        }
        Ok(SetFamily { members, level })
    }

    pub fn empty(level: u32) -> Self {
        SetFamily {
            members: Vec::new(),
            level,
        }
    }

    /// The whole level of the N-cube.
    pub fn full_level(n: u32, level: u32) -> Result<Self, OracleError> {
        if n > ENUMERATION_CAP {
            return Err(OracleError::TooLarge {
                n,
                cap: ENUMERATION_CAP,
            });
        }
        Ok(SetFamily {
            members: level_sets(n, level).collect(),
            level,
        })
    }

    pub fn members(&self) -> &[SetMask] {
        &self.members
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, mask: SetMask) -> bool {
        self.members.binary_search(&mask).is_ok()
    }
}

impl Serialize for SetFamily {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        let dto = SetFamilyDto {
            level: self.level,
            members: self.members.iter().map(|&m| elems_from_mask(m)).collect(),
        };
        dto.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for SetFamily {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let dto = SetFamilyDto::deserialize(de)?;
        let members = dto.members.iter().map(|v| mask_from_elems(v)).collect();
        SetFamily::new(members, dto.level).map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct SetFamilyDto {
    level: u32,
    members: Vec<Vec<u32>>,
}

/// A concrete small instance of the Lemma-4 setup: ambient `{1..N}`, the
/// embedding ground set `X`, the probe set `P`, and the integer size
/// parameters for both cone levels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundSetInstance {
    pub big_n: u32,
    pub x: SetMask,
    pub p: SetMask,
    pub s: u32,
    pub t: u32,
    pub s_cap: u32,
    pub t_floor: u32,
}

impl GroundSetInstance {
    fn validate(&self) -> Result<(), OracleError> {
        if self.big_n > ENUMERATION_CAP {
            return Err(OracleError::TooLarge {
                n: self.big_n,
                cap: ENUMERATION_CAP,
            });
        }
        check_subset(self.x, self.big_n)?;
        check_subset(self.p, self.big_n)?;
        for v in [self.s, self.t, self.s_cap, self.t_floor] {
            if v > self.big_n {
                return Err(OracleError::SizeOutOfRange {
                    value: v,
                    n: self.big_n,
                });
            }
        }
        Ok(())
    }
}

/// All sets `S` of size `s` with `S \ X ⊆ P \ X` and `|S ∩ X| ≤ s_cap`.
pub fn enumerate_s_cone(instance: &GroundSetInstance) -> Result<SetFamily, OracleError> {
    instance.validate()?;
    let members = level_sets(instance.big_n, instance.s)
        .filter(|&s| {
            let outside = s & !instance.x;
            outside & !(instance.p & !instance.x) == 0
                && (s & instance.x).count_ones() <= instance.s_cap
        })
        .collect();
    SetFamily::new(members, instance.s)
}

/// All sets `T` of size `t` with `T ∩ X ⊆ P ∩ X`, `P \ X ⊆ T \ X`, and
/// `|T ∩ X| ≥ t_floor`.
pub fn enumerate_t_cone(instance: &GroundSetInstance) -> Result<SetFamily, OracleError> {
    instance.validate()?;
    let p_outside = instance.p & !instance.x;
    let members = level_sets(instance.big_n, instance.t)
        .filter(|&t| {
            let inside = t & instance.x;
            inside & !(instance.p & instance.x) == 0
                && p_outside & !(t & !instance.x) == 0
                && inside.count_ones() >= instance.t_floor
        })
        .collect();
    SetFamily::new(members, instance.t)
}

/// The quantified size parameters of a pivot lemma. Condition one asks for
/// an `S`-type pivot below every probe pair, condition two for a `T`-type
/// pivot above it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LemmaSizes {
    /// `|P|` in condition one.
    pub probe_one: u32,
    /// Required `|P ∩ X|` in condition one.
    pub meet_one: u32,
    /// Cap on `|S ∩ X|`.
    pub cap_one: u32,
    /// `|P|` in condition two.
    pub probe_two: u32,
    /// Required `|P ∩ X|` in condition two.
    pub meet_two: u32,
    /// Floor on `|T ∩ X|`.
    pub floor_two: u32,
}

impl LemmaSizes {
    /// The sizes of the below-the-middle lemma at ambient size `N` and cube
    /// size `n`. Needs `3 | n` and `2 | N`.
    pub fn lemma_four(big_n: u32, n: u32) -> Self {
        assert!(n % 3 == 0 && big_n % 2 == 0, "sizes must be integral");
        LemmaSizes {
            probe_one: n / 3,
            meet_one: 0,
            cap_one: n / 3,
            probe_two: big_n / 2,
            meet_two: 2 * n / 3,
            floor_two: n / 3,
        }
    }

    /// The complementary above-the-middle lemma.
    pub fn lemma_five(big_n: u32, n: u32) -> Self {
        Self::lemma_four(big_n, n).dual(big_n, n)
    }

    /// Sizes of the complemented instance: condition one of the dual is
    /// condition two of the original under `P -> [N] \ P`, and vice versa.
    pub fn dual(&self, big_n: u32, n: u32) -> Self {
        LemmaSizes {
            probe_one: big_n - self.probe_two,
            meet_one: n - self.meet_two,
            cap_one: n - self.floor_two,
            probe_two: big_n - self.probe_one,
            meet_two: n - self.meet_one,
            floor_two: n - self.cap_one,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PivotVerdict {
    /// Some `S` in the first family is contained in some `T` of the second.
    pub cross_containment: bool,
    /// Every valid probe pair admits an `S`-type pivot.
    pub condition_one: bool,
    /// Every valid probe pair admits a `T`-type pivot.
    pub condition_two: bool,
}

impl PivotVerdict {
    pub fn pass(&self) -> bool {
        !self.cross_containment && self.condition_one && self.condition_two
    }
}

/// Check a pair of candidate pivot families against a lemma's conditions by
/// exhausting every probe pair `(P, X)`.
pub fn check_pivot_conditions(
    s_family: &SetFamily,
    t_family: &SetFamily,
    big_n: u32,
    n: u32,
    sizes: &LemmaSizes,
) -> Result<PivotVerdict, OracleError> {
    if big_n > CONDITION_CAP {
        return Err(OracleError::TooLarge {
            n: big_n,
            cap: CONDITION_CAP,
        });
    }
    for &m in s_family.members().iter().chain(t_family.members()) {
        check_subset(m, big_n)?;
    }

    let cross_containment = s_family
        .members()
        .iter()
        .any(|&s| t_family.members().iter().any(|&t| s & !t == 0));

    let mut condition_one = true;
    let mut condition_two = true;
    for x in level_sets(big_n, n) {
        for p in level_sets(big_n, sizes.probe_one) {
            if (p & x).count_ones() != sizes.meet_one {
                continue;
            }
            let found = s_family.members().iter().any(|&s| {
                p & x & !(s & x) == 0
                    && (s & !x) & !(p & !x) == 0
                    && (s & x).count_ones() <= sizes.cap_one
            });
            condition_one &= found;
        }
        for p in level_sets(big_n, sizes.probe_two) {
            if (p & x).count_ones() != sizes.meet_two {
                continue;
            }
            let found = t_family.members().iter().any(|&t| {
                (t & x) & !(p & x) == 0
                    && (p & !x) & !(t & !x) == 0
                    && (t & x).count_ones() >= sizes.floor_two
            });
            condition_two &= found;
        }
    }
    Ok(PivotVerdict {
        cross_containment,
        condition_one,
        condition_two,
    })
}

/// Complement every member in `{1..N}`.
pub fn dualize(family: &SetFamily, big_n: u32) -> Result<SetFamily, OracleError> {
    let full = full_mask(big_n);
    let members: Result<Vec<SetMask>, OracleError> = family
        .members()
        .iter()
        .map(|&m| {
            check_subset(m, big_n)?;
            Ok(full & !m)
        })
        .collect();
    SetFamily::new(members?, big_n - family.level())
}

/// Include each level-set independently with probability `q`, one draw per
/// set in increasing mask order. Deterministic per seed (ChaCha8 stream).
pub fn sample_pivot_family(
    big_n: u32,
    level: u32,
    q: f64,
    seed: u64,
) -> Result<SetFamily, OracleError> {
    if big_n > ENUMERATION_CAP {
        return Err(OracleError::TooLarge {
            n: big_n,
            cap: ENUMERATION_CAP,
        });
    }
    assert!((0.0..=1.0).contains(&q), "q must be a probability");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let members = level_sets(big_n, level)
        .filter(|_| rng.gen::<f64>() < q)
        .collect();
    SetFamily::new(members, level)
}

/// An induced embedding of the n-cube: `images[m]` is the image of the
/// source subset with mask `m` over coordinates `{1..n}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmbeddingMap {
    n: u32,
    images: Vec<SetMask>,
}

impl EmbeddingMap {
    pub fn new(n: u32, images: Vec<SetMask>) -> Self {
        assert_eq!(images.len(), 1 << n, "need one image per source subset");
        EmbeddingMap { n, images }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn image(&self, source: SetMask) -> SetMask {
        self.images[source as usize]
    }

    pub fn images(&self) -> &[SetMask] {
        &self.images
    }

    /// Verify injectivity and two-sided order preservation; on failure the
    /// error carries a witness pair.
    pub fn validate(&self, big_n: u32) -> Result<(), OracleError> {
        for &img in &self.images {
            check_subset(img, big_n)?;
        }
        let count = self.images.len();
        for a in 0..count {
            for b in 0..count {
                if a == b {
                    continue;
                }
                let source_ok = a & !b == 0;
                let image_ok = self.images[a] & !self.images[b] == 0;
                if source_ok != image_ok || self.images[a] == self.images[b] {
                    return Err(OracleError::NotAnEmbedding {
                        source_a: elems_from_mask(a as SetMask),
                        source_b: elems_from_mask(b as SetMask),
                        image_a: elems_from_mask(self.images[a]),
                        image_b: elems_from_mask(self.images[b]),
                    });
                }
            }
        }
        Ok(())
    }
}

/// The Lemma-3 normal form of an embedding: a ground set `X` of anchor
/// elements with `phi_prime(S) ∩ X = S` for every `S ⊆ X`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizedEmbedding {
    pub x: SetMask,
    /// `anchors[i]` is the ambient element representing source coordinate
    /// `i + 1`.
    pub anchors: Vec<u32>,
    pub phi_prime: EmbeddingMap,
}

/// Constructive normalization: anchor `a(i)` is an element of the image of
/// `{i}` hit by no image avoiding coordinate `i`; the normalized map is the
/// original map read against `X = {a(i)}`.
pub fn normalize_embedding(
    phi: &EmbeddingMap,
    big_n: u32,
) -> Result<NormalizedEmbedding, OracleError> {
    phi.validate(big_n)?;
    let n = phi.n;
    let mut anchors = Vec::with_capacity(n as usize);
    for i in 0..n {
        let mut union_without = 0;
        for (m, &img) in phi.images.iter().enumerate() {
            if m as u32 >> i & 1 == 0 {
                union_without |= img;
            }
        }
        let candidates = phi.images[1 << i] & !union_without;
        if candidates == 0 {
            return Err(OracleError::NormalizationFailed { coordinate: i + 1 });
        }
        anchors.push(candidates.trailing_zeros() + 1);
    }
    let x = mask_from_elems(&anchors);
    Ok(NormalizedEmbedding {
        x,
        anchors,
        phi_prime: phi.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Colour {
    Blue,
    Red,
}

/// The six-region modified layered colouring. Thresholds are the five
/// integer region boundaries `n/3`, `2n/3 + cn/4`, `N/2`, `N - 2n/3 - cn/4`,
/// `N - n/3` of the asymptotic construction, here free integers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColouringSpec {
    pub big_n: u32,
    pub n: u32,
    pub thresholds: [u32; 5],
    pub s1: SetFamily,
    pub t1: SetFamily,
    pub s2: SetFamily,
    pub t2: SetFamily,
}

#[derive(Debug, Clone)]
pub struct Colouring {
    spec: ColouringSpec,
}

/// Realize the six-region rule for a given spec.
pub fn build_colouring(spec: ColouringSpec) -> Result<Colouring, OracleError> {
    let th = spec.thresholds;
    if !(th[0] < th[1] && th[1] < th[2] && th[2] < th[3] && th[3] < th[4] && th[4] <= spec.big_n)
    {
        return Err(OracleError::BadThresholds(th));
    }
    if spec.s1.level() + spec.t2.level() != spec.big_n
        || spec.t1.level() + spec.s2.level() != spec.big_n
    {
        return Err(OracleError::BadFamilyLevels(
            spec.s1.level(),
            spec.t1.level(),
            spec.s2.level(),
            spec.t2.level(),
            spec.big_n,
        ));
    }
    for family in [&spec.s1, &spec.t1, &spec.s2, &spec.t2] {
        for &m in family.members() {
            check_subset(m, spec.big_n)?;
        }
    }
    Ok(Colouring { spec })
}

impl Colouring {
    pub fn spec(&self) -> &ColouringSpec {
        &self.spec
    }

    pub fn colour(&self, a: SetMask) -> Colour {
        let size = a.count_ones();
        let th = self.spec.thresholds;
        let below = |family: &SetFamily| family.members().iter().any(|&s| s & !a == 0);
        let above = |family: &SetFamily| family.members().iter().any(|&t| a & !t == 0);
        if size < th[0] {
            Colour::Blue
        } else if size <= th[1] {
            if below(&self.spec.s1) {
                Colour::Blue
            } else {
                Colour::Red
            }
        } else if size <= th[2] {
            if above(&self.spec.t1) {
                Colour::Red
            } else {
                Colour::Blue
            }
        } else if size <= th[3] {
            if below(&self.spec.s2) {
                Colour::Blue
            } else {
                Colour::Red
            }
        } else if size <= th[4] {
            if above(&self.spec.t2) {
                Colour::Red
            } else {
                Colour::Blue
            }
        } else {
            Colour::Red
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonochromaticCopy {
    pub colour: Colour,
    pub x: SetMask,
    pub embedding: EmbeddingMap,
}

/// Exhaustive search for a monochromatic induced n-cube in a coloured
/// N-cube. Iterates ground sets `X` in the Lemma-3 normal form and monotone
/// completions `phi(S) = S ∪ g(S)` with `g(S) ⊆ [N] \ X`, pruning on colour.
pub fn find_monochromatic_copy<F>(
    colour: F,
    big_n: u32,
    n: u32,
) -> Result<Option<MonochromaticCopy>, OracleError>
where
    F: Fn(SetMask) -> Colour,
{
    if big_n > CONDITION_CAP {
        return Err(OracleError::TooLarge {
            n: big_n,
            cap: CONDITION_CAP,
        });
    }
    if n > 3 {
        return Err(OracleError::SizeOutOfRange { value: n, n: 3 });
    }
    let count = 1usize << n;
    for x in level_sets(big_n, n) {
        let x_elems = elems_from_mask(x);
        let outside = full_mask(big_n) & !x;
        for target in [Colour::Blue, Colour::Red] {
            let mut images = vec![0u32; count];
            if search_completion(&colour, target, x, &x_elems, outside, &mut images, 0) {
                return Ok(Some(MonochromaticCopy {
                    colour: target,
                    x,
                    embedding: EmbeddingMap::new(n, images),
                }));
            }
        }
    }
    Ok(None)
}

fn expand_source(source: usize, x_elems: &[u32]) -> SetMask {
    x_elems
        .iter()
        .enumerate()
        .filter(|(i, _)| source >> i & 1 == 1)
        .fold(0, |m, (_, &e)| m | 1 << (e - 1))
}

fn search_completion<F>(
    colour: &F,
    target: Colour,
    x: SetMask,
    x_elems: &[u32],
    outside: SetMask,
    images: &mut [SetMask],
    source: usize,
) -> bool
where
    F: Fn(SetMask) -> Colour,
{
    if source == images.len() {
        return true;
    }
    // Monotonicity against the immediate predecessors pins a lower bound on
    // g(source); any subset of the remaining outside elements extends it.
    let mut lower = 0;
    for i in 0..x_elems.len() {
        if source >> i & 1 == 1 {
            lower |= images[source & !(1 << i)] & outside;
        }
    }
    let base = expand_source(source, x_elems);
    let free = outside & !lower;
    // Enumerate subsets of `free`, including the empty one.
    let mut extra = free;
    loop {
        let g = lower | (free & !extra);
        let candidate = base | g;
        if colour(candidate) == target {
            images[source] = candidate;
            if search_completion(colour, target, x, x_elems, outside, images, source + 1) {
                return true;
            }
        }
        if extra == 0 {
            break;
        }
        extra = (extra - 1) & free;
    }
    false
}
