//! Certify the six-layer parameters, write the canonical certificate, and
//! read it back.

use poset_ramsey::certifier::{certify, Certificate};
use poset_ramsey::layers::{LayerSchedule, ParamVector};

fn main() {
    let schedule = LayerSchedule::uniform(1).unwrap();
    let params = ParamVector {
        c: vec![1.0 / 6.0],
        h: vec![0.05],
    };
    let cert = certify(&schedule, &params, 1e-6).unwrap();
    println!("c_total = {:.10}, verified = {}", cert.c_total, cert.verified);
    println!("worst intersection margin = {:.3e}", cert.margins.intersection[0]);
    println!("content hash = {}", cert.content_hash());

    let dir = std::env::temp_dir();
    let path = dir.join("six-layer-certificate.json");
    cert.write_to(&path).unwrap();
    let loaded = Certificate::read_from(&path).unwrap();
    assert_eq!(loaded.to_canonical_json(), cert.to_canonical_json());
    println!("round-tripped via {}", path.display());
}
