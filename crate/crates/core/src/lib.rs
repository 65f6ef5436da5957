//! Upper bounds on equiangular line sets with a fixed common angle.

pub mod engine;
pub mod gram;
pub mod rational;
pub mod report;
pub mod two_distance;
pub mod verify;

use num_bigint::BigUint;
use serde::Serializer;

/// Big integers go out as decimal strings so JSON consumers never round them.
pub(crate) fn serialize_opt_big<S: Serializer>(v: &Option<BigUint>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.serialize_str(&v.to_string()),
        None => s.serialize_none(),
    }
}

pub(crate) fn serialize_big<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}
