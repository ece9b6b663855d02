//! Architecture selector resolution.
//!
//! `AE1` through `AE9` name the standard ladder of symmetric topologies:
//! AE1 is D-3-D, and each deeper variant wraps the previous hidden stack
//! in a pair of layers with the next power of two neurons (AE5 on D = 81
//! is 81-32-16-8-4-3-4-8-16-32-81). A comma-separated size list selects
//! an explicit topology; its first and last entries must equal the
//! dataset's encoded dimension.

use ledgerlens_core::nn::LayerSpec;
use ledgerlens_core::{Error, Result};

/// LReLU slope used for every architecture.
pub const LEAKY_SLOPE: f64 = 0.4;

/// Hidden sizes of the named architecture `AE<n>`, 1-based.
pub fn ae_hidden_sizes(n: usize) -> Option<Vec<usize>> {
    if n == 0 || n > 9 {
        return None;
    }
    if n == 1 {
        return Some(vec![3]);
    }
    let mut sizes: Vec<usize> = (2..=n).rev().map(|k| 1usize << k).collect();
    sizes.push(3);
    sizes.extend((2..=n).map(|k| 1usize << k));
    Some(sizes)
}

/// Resolves `AE1`..`AE9` (case-insensitive, optional space) or an
/// explicit comma-separated size list against the dataset dimension.
pub fn resolve_arch(selector: &str, d: usize) -> Result<LayerSpec> {
    let trimmed = selector.trim();
    let upper = trimmed.to_ascii_uppercase();
    if let Some(rest) = upper.strip_prefix("AE") {
        if let Ok(n) = rest.trim().parse::<usize>() {
            let hidden = ae_hidden_sizes(n).ok_or_else(|| {
                Error::Config(format!("unknown architecture '{trimmed}' (expected AE1..AE9)"))
            })?;
            let mut sizes = Vec::with_capacity(hidden.len() + 2);
            sizes.push(d);
            sizes.extend(hidden);
            sizes.push(d);
            return LayerSpec::new(sizes, LEAKY_SLOPE);
        }
    }
    if trimmed.contains(',') {
        let sizes: Vec<usize> = trimmed
            .split(',')
            .map(|part| {
                part.trim().parse::<usize>().map_err(|_| {
                    Error::Config(format!("bad layer size '{}' in '{trimmed}'", part.trim()))
                })
            })
            .collect::<Result<_>>()?;
        if sizes.first() != Some(&d) || sizes.last() != Some(&d) {
            return Err(Error::Config(format!(
                "explicit layer list must start and end at the encoded dimension {d}, got {:?}",
                sizes
            )));
        }
        return LayerSpec::new(sizes, LEAKY_SLOPE);
    }
    Err(Error::Config(format!(
        "cannot parse architecture '{trimmed}': use AE1..AE9 or a comma-separated size list"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ae3_on_81_dimensions() {
        let spec = resolve_arch("AE3", 81).unwrap();
        assert_eq!(spec.layer_sizes(), &[81, 8, 4, 3, 4, 8, 81]);
    }

    #[test]
    fn ladder_matches_published_patterns() {
        assert_eq!(ae_hidden_sizes(1).unwrap(), vec![3]);
        assert_eq!(ae_hidden_sizes(2).unwrap(), vec![4, 3, 4]);
        assert_eq!(
            ae_hidden_sizes(5).unwrap(),
            vec![32, 16, 8, 4, 3, 4, 8, 16, 32]
        );
        assert_eq!(
            ae_hidden_sizes(9).unwrap(),
            vec![512, 256, 128, 64, 32, 16, 8, 4, 3, 4, 8, 16, 32, 64, 128, 256, 512]
        );
        assert!(ae_hidden_sizes(0).is_none());
        assert!(ae_hidden_sizes(10).is_none());
    }

    #[test]
    fn every_named_arch_is_valid_on_both_paper_dims() {
        for d in [401, 576, 81] {
            for n in 1..=9 {
                let spec = resolve_arch(&format!("ae{n}"), d).unwrap();
                assert_eq!(spec.input_dim(), d);
                assert_eq!(*spec.layer_sizes().last().unwrap(), d);
                assert_eq!(spec.bottleneck_size(), 3);
            }
        }
    }

    #[test]
    fn explicit_list_must_match_dimension() {
        assert!(resolve_arch("81,8,4,3,4,8,81", 81).is_ok());
        assert!(resolve_arch("80,8,4,3,4,8,80", 81).is_err());
        assert!(resolve_arch("81,8,3,8,81", 81).is_ok());
        assert!(resolve_arch("AE12", 81).is_err());
        assert!(resolve_arch("resnet", 81).is_err());
    }
}
