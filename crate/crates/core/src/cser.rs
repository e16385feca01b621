//! JSON encoding of complex numbers and arrays as separate real and
//! imaginary parts.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::maps::C64;

#[derive(Serialize, Deserialize)]
struct Parts {
    re: Vec<f64>,
    im: Vec<f64>,
}

pub mod vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[C64], s: S) -> Result<S::Ok, S::Error> {
        Parts { re: v.iter().map(|c| c.re).collect(), im: v.iter().map(|c| c.im).collect() }.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<C64>, D::Error> {
        let p = Parts::deserialize(d)?;
        if p.re.len() != p.im.len() {
            return Err(serde::de::Error::custom("re and im arrays differ in length"));
        }
        Ok(p.re.into_iter().zip(p.im).map(|(r, i)| C64::new(r, i)).collect())
    }
}

pub mod scalar {
    use super::*;

    #[derive(Serialize, Deserialize)]
    struct One {
        re: f64,
        im: f64,
    }

    pub fn serialize<S: Serializer>(c: &C64, s: S) -> Result<S::Ok, S::Error> {
        One { re: c.re, im: c.im }.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
        let o = One::deserialize(d)?;
        Ok(C64::new(o.re, o.im))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize, Deserialize, PartialEq, Debug)]
    struct Doc {
        #[serde(with = "vec")]
        v: Vec<C64>,
        #[serde(with = "scalar")]
        s: C64,
    }

    #[test]
    fn round_trip_and_layout() {
        let d = Doc { v: vec![C64::new(1.0, -2.0), C64::new(0.5, 0.0)], s: C64::new(-3.0, 4.0) };
        let text = serde_json::to_string(&d).unwrap();
        assert_eq!(text, r#"{"v":{"re":[1.0,0.5],"im":[-2.0,0.0]},"s":{"re":-3.0,"im":4.0}}"#);
        assert_eq!(serde_json::from_str::<Doc>(&text).unwrap(), d);
    }

    #[test]
    fn mismatched_parts_are_rejected() {
        let bad = r#"{"v":{"re":[1.0],"im":[]},"s":{"re":0.0,"im":0.0}}"#;
        assert!(serde_json::from_str::<Doc>(bad).is_err());
    }
}
