//! Complex numbers on the wire as `[re, im]` pairs.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
    let [re, im] = <[f64; 2]>::deserialize(d)?;
    Ok(Complex64::new(re, im))
}

pub mod vec {
    use super::*;

    pub fn serialize<S: Serializer>(zs: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = zs.iter().map(|z| [z.re, z.im]).collect();
        pairs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(pairs.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
    }
}
