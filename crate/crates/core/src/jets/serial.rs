use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::Jet;

#[derive(Serialize, Deserialize)]
struct Term {
    alpha: Vec<usize>,
    c: f64,
}

#[derive(Serialize, Deserialize)]
struct JetRepr {
    dim: usize,
    order: usize,
    terms: Vec<Term>,
}

impl Serialize for Jet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        JetRepr {
            dim: self.dim(),
            order: self.order(),
            terms: self.terms().map(|(alpha, c)| Term { alpha, c }).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Jet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Jet, D::Error> {
        let r = JetRepr::deserialize(d)?;
        let terms: Vec<(Vec<usize>, f64)> = r.terms.into_iter().map(|t| (t.alpha, t.c)).collect();
        Jet::from_terms(r.dim, r.order, &terms).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_shape_and_roundtrip() {
        let j = Jet::from_terms(2, 4, &[(vec![0, 4], 1.0), (vec![4, 0], 1.0), (vec![1, 0], 0.0)]).unwrap();
        let s = serde_json::to_string(&j).unwrap();
        assert_eq!(
            s,
            r#"{"dim":2,"order":4,"terms":[{"alpha":[4,0],"c":1.0},{"alpha":[0,4],"c":1.0}]}"#
        );
        let back: Jet = serde_json::from_str(&s).unwrap();
        assert_eq!(back, j);
    }

    #[test]
    fn rejects_bad_alpha() {
        let bad = r#"{"dim":2,"order":2,"terms":[{"alpha":[3,0],"c":1.0}]}"#;
        assert!(serde_json::from_str::<Jet>(bad).is_err());
    }
}
