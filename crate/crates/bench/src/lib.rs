//! Fixed instance families for the solver benchmarks.

use wvc_core::instgen::{generate, GenSpec, Instance, Model, WeightModel};

/// One seeded instance per size, labelled `<model>-n<size>`.
pub fn family(model: Model, sizes: &[usize], weights: WeightModel) -> Vec<(String, Instance)> {
    sizes
        .iter()
        .map(|&n| {
            let inst = generate(&GenSpec {
                model,
                n,
                seed: 1,
                weights,
            })
            .expect("benchmark instance generates");
            (format!("{model}-n{n}"), inst)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_is_labelled_by_size() {
        let f = family(Model::CubicPairing, &[10, 12], WeightModel::Unit);
        assert_eq!(
            f.iter().map(|(s, _)| s.as_str()).collect::<Vec<_>>(),
            ["cubic-pairing-n10", "cubic-pairing-n12"]
        );
    }
}
