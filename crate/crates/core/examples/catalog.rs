//! Walk the stopping-model catalog: closed families, eta additivity and reversal partners.

use stopped_extremes::catalog::{self, make_family, FamilyId};
use stopped_extremes::Pgf;

fn main() -> stopped_extremes::Result<()> {
    let ids = [
        FamilyId::ZtGeometric,
        FamilyId::PotentialConjugate,
        FamilyId::ZtPoisson,
        FamilyId::Logarithmic,
        FamilyId::Ex63 { alpha: 1.0 },
        FamilyId::Ex64 { alpha: 1.0, beta: 2.0 },
        FamilyId::Ex65 { alpha: 1.0, n: 2 },
        FamilyId::Etnb { r: 0.5 },
    ];
    println!("{:<28} {:>6} {:>6} {:>6} {:>8}", "family", "closed", "auto", "N_I", "eta0");
    for id in ids {
        let f = make_family(id)?;
        println!(
            "{:<28} {:>6} {:>6} {:>6} {:>8.3}",
            f.to_string(),
            f.is_closed(),
            f.is_auto_reversible(),
            f.contains_identity(),
            f.eta0()
        );
    }

    let ex63 = make_family(FamilyId::Ex63 { alpha: 1.0 })?;
    let (a, b) = (1.4, 2.1);
    let composed = ex63.member(a)?.compose(&ex63.member(b)?);
    println!("ex63: eta({a}) o eta({b}) has eta {:.12}", composed.eta());

    let ztp = Pgf::zt_poisson(2.0)?;
    if let Some(partner) = catalog::reversal_partner(&ztp) {
        println!(
            "partner of ztP(2) is {} {:?}, gap {:.2e}",
            partner.family(),
            partner.params(),
            catalog::reversibility_gap(&ztp, &partner)
        );
    }
    Ok(())
}
