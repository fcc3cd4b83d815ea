//! Regenerates `data/moduli.txt` from the Conway-rule search.
use folner_core::finite::FiniteField;
use folner_core::registry;

fn main() {
    let pairs: &[(u64, &[u32])] = &[
        (2, &[1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 16]),
        (3, &[1, 2, 3, 4, 5, 6, 8]),
        (5, &[1, 2, 3, 4]),
        (7, &[1, 2, 3, 4]),
        (11, &[1, 2, 3]),
        (13, &[1, 2, 3]),
        (17, &[1, 2]),
        (19, &[1, 2]),
        (23, &[1, 2]),
        (29, &[1, 2]),
        (31, &[1, 2]),
    ];
    for (p, ns) in pairs {
        for &n in *ns {
            FiniteField::new(*p, n).expect("modulus search");
        }
    }
    print!(
        "# p n : c_0 c_1 ... c_n  (low to high, monic)\n{}",
        registry::format_registry(&registry::snapshot())
    );
}
