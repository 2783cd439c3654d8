//! Search model families for points where an indirect effect refutes a criterion.

use mediation::prelude::*;

fn main() {
    for selector in [EffectSelector::Nie, EffectSelector::NieR, EffectSelector::Pe(0)] {
        for family in [Family::Theorem1, Family::Theorem2, Family::PortionEliminated, Family::RandomFig2] {
            let found = search_violations(family, &family.grid(11), selector);
            match found.first() {
                Some(top) => println!(
                    "{:<7} {:<12} {:>4} refutations, largest {:+.4} at {:?} ({:?})",
                    selector.name(),
                    family.name(),
                    found.len(),
                    top.effect_value,
                    top.point,
                    top.refuted
                ),
                None => println!("{:<7} {:<12} none", selector.name(), family.name()),
            }
        }
    }
}
