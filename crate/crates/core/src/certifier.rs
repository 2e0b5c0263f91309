//! Extended-precision re-verification and certificate handling.
//!
//! A certificate records a parameter vector together with its constraint
//! margins recomputed independently of the optimizer: the polynomial margins
//! (intersection, room-for-h, t-below-top) in exact rational arithmetic, the
//! entropy margins (probability, subfamily) in 192-bit fixed point. The
//! canonical JSON form is byte-stable, so certificates can be hashed,
//! shared, and re-verified elsewhere.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::cast::ToPrimitive;
use serde::Deserialize;
use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::Path;
use thiserror::Error;

use crate::hp::{self, entropy_log_rational, Hp};
use crate::layers::{ConstraintMargins, LayerError, LayerSchedule, ParamVector};
use crate::optimizer::objective;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CertifyError {
    #[error(transparent)]
    Layer(#[from] LayerError),
    #[error("epsilon must be positive, got {0}")]
    BadEpsilon(f64),
    #[error("certificate schema version {0} is not supported")]
    SchemaVersion(u32),
    #[error("malformed certificate: {0}")]
    Malformed(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Summary of the derived quantities stored in a certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedSummary {
    pub ambient: f64,
    pub s: Vec<f64>,
    pub t: Vec<f64>,
    pub top: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub schema_version: u32,
    pub num_layers: usize,
    pub epsilon: f64,
    pub params: ParamVector,
    pub c_total: f64,
    pub margins: ConstraintMargins,
    pub derived: DerivedSummary,
    pub verified: bool,
    pub rationalized_denominator: Option<u64>,
    /// Set when double- and extended-precision margins disagree in sign on a
    /// margin of magnitude above 1e-8. Not part of the canonical form.
    pub precision_warning: bool,
}

struct RationalModel {
    red_level: Vec<BigRational>,
    red_climb: Vec<BigRational>,
    blue_level: Vec<BigRational>,
    blue_climb: Vec<BigRational>,
    bottom: Vec<BigRational>,
    top: Vec<BigRational>,
    c: Vec<BigRational>,
    h: Vec<BigRational>,
}

impl RationalModel {
    fn new(schedule: &LayerSchedule, params: &ParamVector) -> Self {
        let frac = |f: crate::layers::Frac| {
            BigRational::new(BigInt::from(*f.numer()), BigInt::from(*f.denom()))
        };
        Self {
            red_level: schedule.rows().iter().map(|r| frac(r.red_level)).collect(),
            red_climb: schedule.rows().iter().map(|r| frac(r.red_climb)).collect(),
            blue_level: schedule.rows().iter().map(|r| frac(r.blue_level)).collect(),
            blue_climb: schedule.rows().iter().map(|r| frac(r.blue_climb)).collect(),
            bottom: schedule.rows().iter().map(|r| frac(r.bottom)).collect(),
            top: schedule.rows().iter().map(|r| frac(r.top)).collect(),
            c: params.c.iter().map(|&v| hp::rational_from_f64(v)).collect(),
            h: params.h.iter().map(|&v| hp::rational_from_f64(v)).collect(),
        }
    }
}

/// Re-evaluate every margin family in extended precision and certify.
pub fn certify(
    schedule: &LayerSchedule,
    params: &ParamVector,
    epsilon: f64,
) -> Result<Certificate, CertifyError> {
    if !(epsilon > 0.0) {
        return Err(CertifyError::BadEpsilon(epsilon));
    }
    params.check_against(schedule)?;
    let num_layers = schedule.num_layers();
    let model = RationalModel::new(schedule, params);
    let one = BigRational::from(BigInt::from(1));
    let two = BigRational::from(BigInt::from(2));
    let eps_rational = hp::rational_from_f64(epsilon);
    let eps_hp = Hp::from_f64(epsilon);

    let ambient = &two + &two * model.c.iter().sum::<BigRational>();

    let mut margins = ConstraintMargins {
        intersection: Vec::with_capacity(num_layers),
        probability: Vec::with_capacity(num_layers),
        room_for_h: Vec::with_capacity(num_layers),
        t_below_top: Vec::with_capacity(num_layers),
        subfamily: Vec::with_capacity(num_layers),
    };
    let mut derived = DerivedSummary {
        ambient: rational_to_f64(&ambient),
        s: Vec::with_capacity(num_layers),
        t: Vec::with_capacity(num_layers),
        top: Vec::with_capacity(num_layers),
    };

    let mut verified = true;
    let mut c_prefix = BigRational::from(BigInt::from(0));
    for i in 0..num_layers {
        let ch = &model.c[i] + &model.h[i];
        let s = &model.bottom[i] + &c_prefix + &model.red_climb[i];
        let t = &s + &ch;
        let topvar = &model.top[i] + &c_prefix + &model.c[i];

        // Exact rational margins.
        let intersection = &model.red_climb[i]
            - &model.red_climb[i] * &model.red_climb[i] / (&one - &model.red_level[i])
            - &ch;
        let room_for_h = &ambient - &topvar - &one + &model.blue_level[i] - &model.h[i];
        let t_below_top = &topvar - &t;

        // Entropy margins in fixed point.
        let kt = entropy_log_rational(&model.blue_level[i], &model.blue_climb[i]).add(
            &entropy_log_rational(
                &(&ambient - &topvar - &one + &model.blue_level[i]),
                &model.h[i],
            ),
        );
        let nt = entropy_log_rational(&(&ambient - &s), &ch);
        let probability = kt.sub(&nt);
        let ks = entropy_log_rational(&(&one - &model.red_level[i]), &model.red_climb[i]);
        let nsect = entropy_log_rational(&model.red_climb[i], &ch).add(&entropy_log_rational(
            &(&one - &model.red_level[i] - &model.red_climb[i]),
            &ch,
        ));
        let subfamily = ks.sub(&nsect);

        verified = verified
            && intersection >= eps_rational
            && room_for_h >= eps_rational
            && t_below_top >= BigRational::from(BigInt::from(0))
            && probability >= eps_hp
            && subfamily >= eps_hp;

        margins.intersection.push(rational_to_f64(&intersection));
        margins.probability.push(probability.to_f64());
        margins.room_for_h.push(rational_to_f64(&room_for_h));
        margins.t_below_top.push(rational_to_f64(&t_below_top));
        margins.subfamily.push(subfamily.to_f64());
        derived.s.push(rational_to_f64(&s));
        derived.t.push(rational_to_f64(&t));
        derived.top.push(rational_to_f64(&topvar));

        c_prefix += &model.c[i];
    }

    // Cross-check against the double-precision path: a sign flip on a margin
    // of real magnitude marks the certificate.
    let double = crate::layers::constraint_margins(schedule, params)?;
    let mut precision_warning = false;
    let families = [
        (&double.intersection, &margins.intersection),
        (&double.probability, &margins.probability),
        (&double.room_for_h, &margins.room_for_h),
        (&double.t_below_top, &margins.t_below_top),
        (&double.subfamily, &margins.subfamily),
    ];
    for (d_family, hp_family) in families {
        for (&d, &h) in d_family.iter().zip(hp_family) {
            if h.abs() > 1e-8 && d.signum() != h.signum() {
                precision_warning = true;
            }
        }
    }

    Ok(Certificate {
        schema_version: SCHEMA_VERSION,
        num_layers,
        epsilon,
        params: params.clone(),
        c_total: objective(params),
        margins,
        derived,
        verified,
        rationalized_denominator: None,
        precision_warning,
    })
}

fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Snap a parameter vector to the grid `1/D`: `c_i` rounded down (shrinking
/// the objective), `h_i` rounded up (growing the slack). Values within 1e-9
/// of a grid point snap to it. Re-certification of the result is mandatory.
pub fn rationalize(params: &ParamVector, denominator: u64) -> ParamVector {
    assert!(denominator >= 1, "denominator must be positive");
    let d = denominator as f64;
    let snap = |y: f64, up: bool| -> f64 {
        let nearest = y.round();
        let k = if (y - nearest).abs() <= 1e-9 {
            nearest
        } else if up {
            y.ceil()
        } else {
            y.floor()
        };
        k / d
    };
    ParamVector {
        c: params.c.iter().map(|&c| snap(c * d, false)).collect(),
        h: params.h.iter().map(|&h| snap(h * d, true)).collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstantEntry {
    pub name: &'static str,
    pub value: f64,
    pub paper_value: f64,
    pub tolerance: f64,
}

impl ConstantEntry {
    pub fn passes(&self) -> bool {
        (self.value - self.paper_value).abs() <= self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstantsTable {
    pub entries: Vec<ConstantEntry>,
}

impl ConstantsTable {
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(ConstantEntry::passes)
    }
}

/// The named growth bases of the six-layer construction, recomputed from the
/// entropy estimate and tabulated against their published roundings.
pub fn paper_constants() -> ConstantsTable {
    let entropy = |c: f64, d: f64| crate::exponent::entropy_log(c, d).unwrap().value;
    let s_cone = entropy(1.0, 1.0 / 3.0).exp();
    let t_cone = (entropy(2.0 / 3.0, 1.0 / 3.0) + entropy(5.0 / 6.0, 0.05)).exp();
    let removal = (entropy(1.0 / 3.0, 13.0 / 60.0) + entropy(2.0 / 3.0, 13.0 / 60.0)).exp();
    let neighbourhood = entropy(5.0 / 3.0, 13.0 / 60.0).exp();
    let q = 0.525;
    let entry = |name, value, paper_value| ConstantEntry {
        name,
        value,
        paper_value,
        tolerance: 1e-4,
    };
    ConstantsTable {
        entries: vec![
            entry("s_cone_base", s_cone, 1.88988),
            entry("t_cone_base", t_cone, 1.917913),
            entry("removal_base", removal, 1.88929),
            entry("neighbourhood_base", neighbourhood, 1.9041),
            entry("expectation_base", 1.9179 * q, 1.0068),
            entry("bad_base", 1.9041 * q, 0.9997),
            entry("subfamily_base", 1.8898 / 1.8893, 1.0002),
            entry("pivot_probability", q, 0.525),
        ],
    }
}

fn fmt_f64(x: f64) -> String {
    // 17 significant digits round-trips every f64.
    format!("{:.16e}", x)
}

fn fmt_array(values: &[f64]) -> String {
    let inner: Vec<String> = values.iter().map(|&v| fmt_f64(v)).collect();
    format!("[{}]", inner.join(","))
}

impl Certificate {
    /// Canonical serialization: fixed key order, 17-significant-digit
    /// numbers, no whitespace, newline-terminated.
    pub fn to_canonical_json(&self) -> String {
        let rationalized = match self.rationalized_denominator {
            Some(d) => d.to_string(),
            None => "null".to_string(),
        };
        format!(
            concat!(
                "{{\"schema_version\":{},\"L\":{},\"epsilon\":{},",
                "\"params\":{{\"c\":{},\"h\":{}}},\"c_total\":{},",
                "\"margins\":{{\"intersection\":{},\"probability\":{},",
                "\"room_for_h\":{},\"t_below_top\":{},\"subfamily\":{}}},",
                "\"derived\":{{\"N\":{},\"s\":{},\"t\":{},\"top\":{}}},",
                "\"verified\":{},\"rationalized_denominator\":{}}}\n"
            ),
            self.schema_version,
            self.num_layers,
            fmt_f64(self.epsilon),
            fmt_array(&self.params.c),
            fmt_array(&self.params.h),
            fmt_f64(self.c_total),
            fmt_array(&self.margins.intersection),
            fmt_array(&self.margins.probability),
            fmt_array(&self.margins.room_for_h),
            fmt_array(&self.margins.t_below_top),
            fmt_array(&self.margins.subfamily),
            fmt_f64(self.derived.ambient),
            fmt_array(&self.derived.s),
            fmt_array(&self.derived.t),
            fmt_array(&self.derived.top),
            self.verified,
            rationalized,
        )
    }

    /// SHA-256 of the canonical form, hex-encoded.
    pub fn content_hash(&self) -> String {
        let digest = Sha256::digest(self.to_canonical_json().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn from_json(text: &str) -> Result<Self, CertifyError> {
        let dto: CertificateDto =
            serde_json::from_str(text).map_err(|e| CertifyError::Malformed(e.to_string()))?;
        if dto.schema_version != SCHEMA_VERSION {
            return Err(CertifyError::SchemaVersion(dto.schema_version));
        }
        let want = dto.num_layers;
        let all = [
            dto.params.c.len(),
            dto.params.h.len(),
            dto.margins.intersection.len(),
            dto.margins.probability.len(),
            dto.margins.room_for_h.len(),
            dto.margins.t_below_top.len(),
            dto.margins.subfamily.len(),
            dto.derived.s.len(),
            dto.derived.t.len(),
            dto.derived.top.len(),
        ];
        if all.iter().any(|&len| len != want) {
            return Err(CertifyError::Malformed(format!(
                "array lengths do not all match L = {want}"
            )));
        }
        Ok(Certificate {
            schema_version: dto.schema_version,
            num_layers: dto.num_layers,
            epsilon: dto.epsilon,
            params: ParamVector {
                c: dto.params.c,
                h: dto.params.h,
            },
            c_total: dto.c_total,
            margins: ConstraintMargins {
                intersection: dto.margins.intersection,
                probability: dto.margins.probability,
                room_for_h: dto.margins.room_for_h,
                t_below_top: dto.margins.t_below_top,
                subfamily: dto.margins.subfamily,
            },
            derived: DerivedSummary {
                ambient: dto.derived.ambient,
                s: dto.derived.s,
                t: dto.derived.t,
                top: dto.derived.top,
            },
            verified: dto.verified,
            rationalized_denominator: dto.rationalized_denominator,
            precision_warning: false,
        })
    }

    /// Atomic write: temp file in the target directory, then rename.
    pub fn write_to(&self, path: &Path) -> Result<(), CertifyError> {
        let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
        let mut tmp = match dir {
            Some(dir) => tempfile::NamedTempFile::new_in(dir)?,
            None => tempfile::NamedTempFile::new_in(".")?,
        };
        tmp.write_all(self.to_canonical_json().as_bytes())?;
        tmp.flush()?;
        tmp.persist(path).map_err(|e| CertifyError::Io(e.error))?;
        Ok(())
    }

    pub fn read_from(path: &Path) -> Result<Self, CertifyError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[derive(Deserialize)]
struct CertificateDto {
    schema_version: u32,
    #[serde(rename = "L")]
    num_layers: usize,
    epsilon: f64,
    params: ParamsDto,
    c_total: f64,
    margins: MarginsDto,
    derived: DerivedDto,
    verified: bool,
    rationalized_denominator: Option<u64>,
}

#[derive(Deserialize)]
struct ParamsDto {
    c: Vec<f64>,
    h: Vec<f64>,
}

#[derive(Deserialize)]
struct MarginsDto {
    intersection: Vec<f64>,
    probability: Vec<f64>,
    room_for_h: Vec<f64>,
    t_below_top: Vec<f64>,
    subfamily: Vec<f64>,
}

#[derive(Deserialize)]
struct DerivedDto {
    #[serde(rename = "N")]
    ambient: f64,
    s: Vec<f64>,
    t: Vec<f64>,
    top: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn six_layer() -> (LayerSchedule, ParamVector) {
        (
            LayerSchedule::uniform(1).unwrap(),
            ParamVector {
                c: vec![1.0 / 6.0],
                h: vec![0.05],
            },
        )
    }

    #[test]
    fn certifies_paper_parameters() {
        let (s, p) = six_layer();
        let cert = certify(&s, &p, 1e-6).unwrap();
        assert!(cert.verified);
        assert!(!cert.precision_warning);
        assert!((cert.c_total - 1.0 / 3.0).abs() < 1e-12);
        // intersection margin is exactly 1/180
        assert!((cert.margins.intersection[0] - 1.0 / 180.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_infeasible_quarter() {
        let s = LayerSchedule::uniform(1).unwrap();
        let p = ParamVector {
            c: vec![0.25],
            h: vec![0.0],
        };
        let cert = certify(&s, &p, 1e-6).unwrap();
        assert!(!cert.verified);
        assert!(cert.margins.intersection[0] < 0.0);
    }

    #[test]
    fn errors_on_length_mismatch_and_bad_epsilon() {
        let s = LayerSchedule::uniform(1).unwrap();
        let p = ParamVector {
            c: vec![1.0 / 6.0, 1.0 / 6.0],
            h: vec![0.05],
        };
        assert!(matches!(
            certify(&s, &p, 1e-6),
            Err(CertifyError::Layer(LayerError::LengthMismatch { .. }))
        ));
        let (s, p) = six_layer();
        assert!(matches!(
            certify(&s, &p, 0.0),
            Err(CertifyError::BadEpsilon(_))
        ));
    }

    #[test]
    fn verified_is_monotone_in_epsilon() {
        let (s, p) = six_layer();
        for eps in [1e-6, 1e-8, 1e-10] {
            assert!(certify(&s, &p, eps).unwrap().verified);
        }
    }

    #[test]
    fn rationalize_recovers_exact_paper_values() {
        let p = ParamVector {
            c: vec![0.1667],
            h: vec![0.05],
        };
        let r = rationalize(&p, 60);
        assert_eq!(r.c, vec![10.0 / 60.0]);
        assert_eq!(r.h, vec![3.0 / 60.0]);
    }

    #[test]
    fn rationalize_identity_on_zero() {
        let p = ParamVector::zeros(3);
        assert_eq!(rationalize(&p, 7), p);
        assert_eq!(rationalize(&p, 1000), p);
    }

    #[test]
    fn rationalize_coarse_grid_can_break_feasibility() {
        // On a ninths grid the paper point rounds to c = h = 1/9, which sits
        // exactly on the intersection cap 2/9, so the margin drops below
        // epsilon and re-certification must fail.
        let (s, p) = six_layer();
        assert!(certify(&s, &p, 1e-6).unwrap().verified);
        let r = rationalize(&p, 9);
        assert_eq!(r.c, vec![1.0 / 9.0]);
        assert_eq!(r.h, vec![1.0 / 9.0]);
        assert!(!certify(&s, &r, 1e-6).unwrap().verified);
    }

    #[test]
    fn constants_table_passes() {
        let table = paper_constants();
        assert_eq!(table.entries.len(), 8);
        assert!(table.all_pass());
        let by_name = |n: &str| {
            table
                .entries
                .iter()
                .find(|e| e.name == n)
                .expect("entry")
                .value
        };
        assert!((by_name("s_cone_base") - 1.8898815748423097).abs() < 1e-12);
        assert!(by_name("bad_base") <= 0.9997);
        assert!(by_name("subfamily_base") >= 1.0002);
        assert!(by_name("expectation_base") > 1.0068);
        assert!(by_name("neighbourhood_base") <= 1.9041);
    }

    #[test]
    fn canonical_round_trip() {
        let (s, p) = six_layer();
        let cert = certify(&s, &p, 1e-6).unwrap();
        let json = cert.to_canonical_json();
        assert!(json.ends_with('\n'));
        assert!(!json.contains(' '));
        let parsed = Certificate::from_json(&json).unwrap();
        let re = certify(&s, &parsed.params, parsed.epsilon).unwrap();
        assert_eq!(re.verified, cert.verified);
        for (a, b) in re
            .margins
            .probability
            .iter()
            .zip(&cert.margins.probability)
        {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(re.to_canonical_json(), json);
        assert_eq!(re.content_hash(), cert.content_hash());
    }

    #[test]
    fn hash_changes_with_content() {
        let (s, p) = six_layer();
        let a = certify(&s, &p, 1e-6).unwrap();
        let mut b = a.clone();
        b.rationalized_denominator = Some(60);
        assert_ne!(a.content_hash(), b.content_hash());
    }

    #[test]
    fn atomic_write_and_read() {
        let (s, p) = six_layer();
        let cert = certify(&s, &p, 1e-6).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cert.json");
        cert.write_to(&path).unwrap();
        let loaded = Certificate::read_from(&path).unwrap();
        assert_eq!(loaded.to_canonical_json(), cert.to_canonical_json());
    }

    #[test]
    fn rejects_unknown_schema() {
        let (s, p) = six_layer();
        let cert = certify(&s, &p, 1e-6).unwrap();
        let json = cert.to_canonical_json().replace(
            "\"schema_version\":1",
            "\"schema_version\":99",
        );
        assert!(matches!(
            Certificate::from_json(&json),
            Err(CertifyError::SchemaVersion(99))
        ));
    }
}
