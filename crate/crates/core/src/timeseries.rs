//! Time-series container, multi-asset panels and elementary transforms.
//!
//! The integer stamp is the canonical axis. Calendar dates are carried as a
//! day count (days since 0001-01-01, proleptic Gregorian) and flagged with
//! [`AxisKind::Date`] so that IO layers can render them back.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent float methods need std
use num_traits::Float;

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum AxisKind {
    #[default]
    Tick,
    Date,
}

/// Timestamp-aligned sequence of finite values.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    kind: AxisKind,
    stamps: Vec<i64>,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(kind: AxisKind, stamps: Vec<i64>, values: Vec<f64>) -> Result<Self> {
        if stamps.len() != values.len() {
            return Err(Error::LengthMismatch {
                left: stamps.len(),
                right: values.len(),
            });
        }
        if values.is_empty() {
            return Err(Error::TooShort { needed: 1, got: 0 });
        }
        if let Some(i) = stamps.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::NonIncreasing { index: i + 1 });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index: i });
        }
        Ok(Self {
            kind,
            stamps,
            values,
        })
    }

    /// Series on the tick axis `0, 1, ..., n-1`.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        let stamps = (0..values.len() as i64).collect();
        Self::new(AxisKind::Tick, stamps, values)
    }

    pub fn kind(&self) -> AxisKind {
        self.kind
    }

    pub fn stamps(&self) -> &[i64] {
        &self.stamps
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn first(&self) -> f64 {
        self.values[0]
    }

    pub fn last(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Log-price mode: applies `ln` to every value.
    pub fn ln(&self) -> Result<Self> {
        if let Some(i) = self.values.iter().position(|&v| v <= 0.0) {
            return Err(invalid(
                "prices",
                alloc::format!("log mode needs positive prices, index {i} is not"),
            ));
        }
        Ok(Self {
            kind: self.kind,
            stamps: self.stamps.clone(),
            values: self.values.iter().map(|v| v.ln()).collect(),
        })
    }
}

/// Price changes `D_t = S_t - S_{t-1}`, stamped at `t`.
pub fn diff(prices: &TimeSeries) -> Result<TimeSeries> {
    if prices.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: prices.len(),
        });
    }
    Ok(TimeSeries {
        kind: prices.kind,
        stamps: prices.stamps[1..].to_vec(),
        values: diff_values(&prices.values),
    })
}

pub fn diff_values(x: &[f64]) -> Vec<f64> {
    x.windows(2).map(|w| w[1] - w[0]).collect()
}

/// Inverse of [`diff_values`]: `[start, start + d0, start + d0 + d1, ...]`.
pub fn cumsum(start: f64, d: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(d.len() + 1);
    let mut s = start;
    out.push(s);
    for &x in d {
        s += x;
        out.push(s);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Asset {
    pub name: String,
    /// Informational label (equity, bond, fx, ...).
    pub class: Option<String>,
    pub series: TimeSeries,
}

impl Asset {
    pub fn new(name: impl Into<String>, series: TimeSeries) -> Self {
        Self {
            name: name.into(),
            class: None,
            series,
        }
    }
}

/// Named collection of price series.
#[derive(Debug, Clone, PartialEq)]
pub struct AssetPanel {
    assets: Vec<Asset>,
    /// `fill_mask[k][i]` is true when asset `k` at axis position `i` was
    /// forward-filled by [`align`].
    fill_mask: Option<Vec<Vec<bool>>>,
}

impl AssetPanel {
    pub fn new(assets: Vec<Asset>) -> Result<Self> {
        if assets.is_empty() {
            return Err(invalid("assets", "panel needs at least one asset"));
        }
        let mut seen = BTreeMap::new();
        for a in &assets {
            if seen.insert(a.name.as_str(), ()).is_some() {
                return Err(Error::DuplicateAsset(a.name.clone()));
            }
        }
        Ok(Self {
            assets,
            fill_mask: None,
        })
    }

    /// Aligned panel on a shared tick axis from raw price columns.
    pub fn from_columns(names: &[&str], columns: Vec<Vec<f64>>) -> Result<Self> {
        if names.len() != columns.len() {
            return Err(Error::LengthMismatch {
                left: names.len(),
                right: columns.len(),
            });
        }
        let assets = names
            .iter()
            .zip(columns)
            .map(|(n, c)| Ok(Asset::new(*n, TimeSeries::from_values(c)?)))
            .collect::<Result<Vec<_>>>()?;
        let panel = Self::new(assets)?;
        if !panel.is_aligned() {
            return Err(invalid("columns", "price columns must share one length"));
        }
        Ok(panel)
    }

    pub fn assets(&self) -> &[Asset] {
        &self.assets
    }

    pub fn len(&self) -> usize {
        self.assets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assets.is_empty()
    }

    /// Length of the first asset's series (of every series once aligned).
    pub fn ticks(&self) -> usize {
        self.assets[0].series.len()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.assets.iter().map(|a| a.name.as_str())
    }

    pub fn fill_mask(&self) -> Option<&[Vec<bool>]> {
        self.fill_mask.as_deref()
    }

    /// All assets share the same timestamp axis.
    pub fn is_aligned(&self) -> bool {
        let first = self.assets[0].series.stamps();
        self.assets.iter().all(|a| a.series.stamps() == first)
    }

    /// Common axis of an aligned panel.
    pub fn axis(&self) -> Result<&[i64]> {
        if !self.is_aligned() {
            return Err(invalid("panel", "panel is not aligned"));
        }
        Ok(self.assets[0].series.stamps())
    }

    pub fn asset(&self, name: &str) -> Option<&Asset> {
        self.assets.iter().find(|a| a.name == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum AlignPolicy {
    /// Keep only stamps present in every asset.
    #[default]
    Inner,
    /// Union of stamps; missing prices forward-filled and flagged. The axis
    /// starts at the first stamp where every asset has been observed.
    OuterFill,
}

/// Puts every asset of the panel on one timestamp axis.
pub fn align(panel: &AssetPanel, policy: AlignPolicy) -> Result<AssetPanel> {
    let kind = panel.assets[0].series.kind();
    if panel.assets.iter().any(|a| a.series.kind() != kind) {
        return Err(invalid("panel", "mixed date and tick axes"));
    }
    let axis: Vec<i64> = match policy {
        AlignPolicy::Inner => {
            let mut common: Vec<i64> = panel.assets[0].series.stamps().to_vec();
            for a in &panel.assets[1..] {
                let other = a.series.stamps();
                common.retain(|s| other.binary_search(s).is_ok());
            }
            common
        }
        AlignPolicy::OuterFill => {
            let start = panel
                .assets
                .iter()
                .map(|a| a.series.stamps()[0])
                .max()
                .unwrap_or_default();
            let mut all: Vec<i64> = panel
                .assets
                .iter()
                .flat_map(|a| a.series.stamps().iter().copied())
                .filter(|&s| s >= start)
                .collect();
            all.sort_unstable();
            all.dedup();
            all
        }
    };
    if axis.is_empty() {
        return Err(Error::EmptyIntersection);
    }

    let mut assets = Vec::with_capacity(panel.assets.len());
    let mut mask = Vec::with_capacity(panel.assets.len());
    for (k, a) in panel.assets.iter().enumerate() {
        let stamps = a.series.stamps();
        let values = a.series.values();
        let prior = panel.fill_mask.as_ref().map(|m| &m[k]);
        let mut out = Vec::with_capacity(axis.len());
        let mut filled = Vec::with_capacity(axis.len());
        let mut j = 0usize;
        for &s in &axis {
            while j + 1 < stamps.len() && stamps[j + 1] <= s {
                j += 1;
            }
            if stamps[j] == s {
                out.push(values[j]);
                filled.push(prior.is_some_and(|p| p[j]));
            } else {
                // policy guarantees stamps[j] < s here
                out.push(values[j]);
                filled.push(true);
            }
        }
        assets.push(Asset {
            name: a.name.clone(),
            class: a.class.clone(),
            series: TimeSeries::new(kind, axis.clone(), out)?,
        });
        mask.push(filled);
    }
    let any_fill = mask.iter().flatten().any(|&f| f);
    Ok(AssetPanel {
        assets,
        fill_mask: (any_fill || panel.fill_mask.is_some()).then_some(mask),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn ts(stamps: &[i64], values: &[f64]) -> TimeSeries {
        TimeSeries::new(AxisKind::Tick, stamps.to_vec(), values.to_vec()).unwrap()
    }

    #[test]
    fn rejects_bad_series() {
        assert_eq!(
            TimeSeries::new(AxisKind::Tick, vec![0, 0], vec![1.0, 2.0]),
            Err(Error::NonIncreasing { index: 1 })
        );
        assert_eq!(
            TimeSeries::new(AxisKind::Tick, vec![0, 1], vec![1.0, f64::NAN]),
            Err(Error::NonFinite { index: 1 })
        );
        assert!(TimeSeries::from_values(vec![]).is_err());
    }

    #[test]
    fn diff_examples() {
        let d = diff(&TimeSeries::from_values(vec![100.0, 101.0, 100.0]).unwrap()).unwrap();
        assert_eq!(d.values(), &[1.0, -1.0]);
        assert_eq!(d.stamps(), &[1, 2]);
        let d = diff(&TimeSeries::from_values(vec![5.0; 3]).unwrap()).unwrap();
        assert_eq!(d.values(), &[0.0, 0.0]);
        assert!(diff(&TimeSeries::from_values(vec![1.0]).unwrap()).is_err());
    }

    #[test]
    fn cumsum_inverts_diff() {
        let s = [3.0, 4.5, 4.25, 10.0, -2.0];
        assert_eq!(cumsum(s[0], &diff_values(&s)), s.to_vec());
    }

    #[test]
    fn log_mode() {
        let s = TimeSeries::from_values(vec![1.0, core::f64::consts::E]).unwrap();
        assert_eq!(s.ln().unwrap().values(), &[0.0, 1.0]);
        assert!(TimeSeries::from_values(vec![1.0, 0.0]).unwrap().ln().is_err());
    }

    #[test]
    fn duplicate_names_rejected() {
        let a = Asset::new("x", ts(&[0], &[1.0]));
        assert!(matches!(
            AssetPanel::new(vec![a.clone(), a]),
            Err(Error::DuplicateAsset(_))
        ));
    }

    #[test]
    fn align_identity_on_shared_axis() {
        let p = AssetPanel::new(vec![
            Asset::new("a", ts(&[0, 1, 2], &[1.0, 2.0, 3.0])),
            Asset::new("b", ts(&[0, 1, 2], &[4.0, 5.0, 6.0])),
        ])
        .unwrap();
        assert_eq!(align(&p, AlignPolicy::Inner).unwrap(), p);
        assert_eq!(align(&p, AlignPolicy::OuterFill).unwrap(), p);
    }

    #[test]
    fn inner_join_restricts_to_common_stamps() {
        let p = AssetPanel::new(vec![
            Asset::new("a", ts(&[0, 1, 2, 3], &[1.0, 2.0, 3.0, 4.0])),
            Asset::new("b", ts(&[1, 3, 5], &[5.0, 6.0, 7.0])),
        ])
        .unwrap();
        let q = align(&p, AlignPolicy::Inner).unwrap();
        assert_eq!(q.axis().unwrap(), &[1, 3]);
        assert_eq!(q.assets()[0].series.values(), &[2.0, 4.0]);
        assert!(q.fill_mask().is_none());
    }

    #[test]
    fn inner_join_of_disjoint_axes_fails() {
        let p = AssetPanel::new(vec![
            Asset::new("a", ts(&[0, 1], &[1.0, 2.0])),
            Asset::new("b", ts(&[2, 3], &[5.0, 6.0])),
        ])
        .unwrap();
        assert_eq!(
            align(&p, AlignPolicy::Inner),
            Err(Error::EmptyIntersection)
        );
    }

    #[test]
    fn outer_fill_flags_filled_values() {
        let p = AssetPanel::new(vec![
            Asset::new("a", ts(&[0, 1, 2], &[1.0, 2.0, 3.0])),
            Asset::new("b", ts(&[0, 2], &[5.0, 7.0])),
        ])
        .unwrap();
        let q = align(&p, AlignPolicy::OuterFill).unwrap();
        assert_eq!(q.assets()[1].series.values(), &[5.0, 5.0, 7.0]);
        let mask = q.fill_mask().unwrap();
        assert_eq!(mask[0], vec![false; 3]);
        assert_eq!(mask[1], vec![false, true, false]);
        assert_eq!(align(&q, AlignPolicy::OuterFill).unwrap(), q);
    }

    #[test]
    fn outer_fill_starts_when_all_assets_are_observed() {
        let p = AssetPanel::new(vec![
            Asset::new("a", ts(&[0, 1, 2, 3], &[1.0, 2.0, 3.0, 4.0])),
            Asset::new("b", ts(&[2, 4], &[5.0, 7.0])),
        ])
        .unwrap();
        let q = align(&p, AlignPolicy::OuterFill).unwrap();
        assert_eq!(q.axis().unwrap(), &[2, 3, 4]);
        assert_eq!(q.assets()[0].series.values(), &[3.0, 4.0, 4.0]);
        assert_eq!(q.fill_mask().unwrap()[0], vec![false, false, true]);
    }
}
