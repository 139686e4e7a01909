use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::features::FeatureVector;

/// Sparse weights θ; absent features weigh 0.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WeightVector {
    weights: HashMap<Arc<str>, f64>,
}

impl WeightVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, name: &str) -> f64 {
        self.weights.get(name).copied().unwrap_or(0.0)
    }

    /// Setting a weight to zero removes it.
    pub fn set(&mut self, name: impl Into<Arc<str>>, value: f64) {
        let name = name.into();
        if value == 0.0 {
            self.weights.remove(&name);
        } else {
            self.weights.insert(name, value);
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Arc<str>, f64)> {
        self.weights.iter().map(|(k, v)| (k, *v))
    }

    pub fn to_map(&self) -> BTreeMap<String, f64> {
        self.iter().map(|(k, v)| (k.to_string(), v)).collect()
    }
}

impl FromIterator<(String, f64)> for WeightVector {
    fn from_iter<I: IntoIterator<Item = (String, f64)>>(iter: I) -> Self {
        let mut w = WeightVector::new();
        for (k, v) in iter {
            w.set(k, v);
        }
        w
    }
}

impl Serialize for WeightVector {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_map().serialize(s)
    }
}

impl<'de> Deserialize<'de> for WeightVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let map = BTreeMap::<String, f64>::deserialize(d)?;
        if let Some((k, _)) = map.iter().find(|(_, v)| !v.is_finite()) {
            return Err(serde::de::Error::custom(format!("weight `{k}` is not finite")));
        }
        Ok(map.into_iter().collect())
    }
}

/// θᵀφ, summed in feature-name order.
pub fn score(weights: &WeightVector, features: &FeatureVector) -> f64 {
    features.iter().map(|(k, v)| weights.get(k) * v).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dot_products() {
        let mut w = WeightVector::new();
        assert_eq!(score(&w, &FeatureVector::new()), 0.0);
        w.set("a", 2.0);
        let phi = FeatureVector::from_pairs([("a", 1.0), ("b", 5.0)]);
        assert_eq!(score(&w, &phi), 2.0);
    }

    #[test]
    fn linear() {
        let mut w = WeightVector::new();
        w.set("a", 0.5);
        w.set("b", -1.5);
        let p1 = FeatureVector::from_pairs([("a", 1.0), ("b", 2.0)]);
        let p2 = FeatureVector::from_pairs([("b", 1.0), ("c", 4.0)]);
        let sum = p1.add_scaled(&p2, 1.0);
        assert!((score(&w, &sum) - (score(&w, &p1) + score(&w, &p2))).abs() < 1e-12);
    }

    #[test]
    fn serde_round_trip() {
        let mut w = WeightVector::new();
        w.set("cooc|delete|removeFiles", 0.25);
        let json = serde_json::to_string(&w).unwrap();
        let back: WeightVector = serde_json::from_str(&json).unwrap();
        assert_eq!(back, w);
        w.set("x", 0.0);
        assert_eq!(w.len(), 1);
    }
}
