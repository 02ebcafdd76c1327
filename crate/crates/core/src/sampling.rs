//! Positive/negative image sampling over patient metadata.

use std::collections::{BTreeSet, HashSet};

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetadataRecord {
    pub image_id: String,
    pub patient_id: String,
    pub labels: BTreeSet<String>,
}

impl MetadataRecord {
    pub fn new<I, S>(image_id: impl Into<String>, patient_id: impl Into<String>, labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            image_id: image_id.into(),
            patient_id: patient_id.into(),
            labels: labels.into_iter().map(Into::into).collect(),
        }
    }

    fn has(&self, disease: &str) -> bool {
        self.labels.contains(disease)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampledPairs {
    pub positive: String,
    pub negatives: Vec<String>,
}

/// Draws one positive and `k` negatives for `query_id` under `disease`.
///
/// The positive is another image of the same patient carrying the
/// disease; negatives carry the disease but belong to other patients and
/// are drawn without replacement. The draw depends only on the table
/// order and `seed`.
pub fn sample_pairs(
    table: &[MetadataRecord],
    query_id: &str,
    disease: &str,
    k: usize,
    seed: u64,
) -> Result<SampledPairs> {
    if k == 0 {
        return Err(Error::param("k must be at least 1"));
    }
    let mut seen = HashSet::with_capacity(table.len());
    if let Some(dup) = table.iter().find(|r| !seen.insert(r.image_id.as_str())) {
        return Err(Error::InvalidRecord(format!(
            "duplicate image id {} in metadata table",
            dup.image_id
        )));
    }
    let query = table
        .iter()
        .find(|r| r.image_id == query_id)
        .ok_or_else(|| Error::param(format!("unknown query image {query_id}")))?;
    if !query.has(disease) {
        return Err(Error::param(format!(
            "query image {query_id} is not labeled {disease}"
        )));
    }

    let positives: Vec<&MetadataRecord> = table
        .iter()
        .filter(|r| r.patient_id == query.patient_id && r.image_id != query.image_id && r.has(disease))
        .collect();
    let negatives: Vec<&MetadataRecord> = table
        .iter()
        .filter(|r| r.patient_id != query.patient_id && r.has(disease))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let positive = positives
        .choose(&mut rng)
        .ok_or_else(|| Error::NoPositiveSample(query_id.to_string()))?;
    if negatives.len() < k {
        return Err(Error::InsufficientNegatives {
            requested: k,
            available: negatives.len(),
        });
    }
    let negatives = index::sample(&mut rng, negatives.len(), k)
        .into_iter()
        .map(|i| negatives[i].image_id.clone())
        .collect();

    Ok(SampledPairs {
        positive: positive.image_id.clone(),
        negatives,
    })
}
