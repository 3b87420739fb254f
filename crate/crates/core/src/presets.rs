//! Named parameter sets.
//!
//! The toy groups are for desk-scale tests and simulation. `modp-2048-256` is a
//! 2048-bit prime with a 256-bit prime-order subgroup, generated for this crate
//! and checked by [`GroupParams::validate`] on first use.

use std::sync::OnceLock;

use num_bigint::BigUint;

use crate::encoding::parse_decimal;
use crate::group_math::{GroupParams, Profile};

const MODP_2048_P: &str = "18676028943879262324778531437012260015905536287940413476745241852014968509456932601420500161145101795572363607452329356391342661405680390789649556656498405815115008934731378869581830629694200380626591876840629597345550223616270868625922387436406892156649577562257766618135900134435842967028294468069085972604632494809092015277234021983009032407958193754982826130494233523305321706237642869097864509131032338265841909603107131517558859882803268588051197209714299877556331365054573345539050456924015004415681719550307672309239758645639752909349664184042273202956049600630807541510514295859569894521325056364645846349013";
const MODP_2048_Q: &str =
    "67482241527659538641389738423938693332563169838147195139393816443469223404793";
const MODP_2048_G: &str = "1088637194578333609676023972838387251151761056060315142403042112488559588192358977023307436802498039341682366762610070079557743790157285704786546211758605862964671854374285374041169777567893417259133839351021516464147510664833788474679549479941071626302106988036610574943160158647188653184117950231331904341428613182009930062441491646121235046965019099021741421892512923049034927360547367456150192629868135928790979313616390980372371961543106907113731061147174795565965591515792301658591148994187124240247594732741651793311548889439625080937275450249503764104942563072512031953351438135585684795037579666563382285430";

/// `(name, p, q, g)` for the small groups.
pub const TOY_GROUPS: [(&str, u64, u64, u64); 6] = [
    ("paper-47", 47, 23, 3),
    ("toy-59", 59, 29, 3),
    ("toy-83", 83, 41, 3),
    ("toy-107", 107, 53, 3),
    ("toy-167", 167, 83, 2),
    (
        "toy-64bit",
        15645712828147418183,
        266800464311371,
        12865706716619451616,
    ),
];

pub const PRESET_NAMES: [&str; 7] = [
    "paper-47",
    "toy-59",
    "toy-83",
    "toy-107",
    "toy-167",
    "toy-64bit",
    "modp-2048-256",
];

/// The (p, q, g) = (47, 23, 3) group of the worked example.
pub fn paper_group() -> &'static GroupParams {
    static CELL: OnceLock<GroupParams> = OnceLock::new();
    CELL.get_or_init(|| {
        GroupParams::validate_u64(47, 23, 3, Profile::Toy).expect("paper group is valid")
    })
}

/// Toy group with a 48-bit subgroup order; accidental collisions are negligible.
pub fn toy_64bit() -> &'static GroupParams {
    static CELL: OnceLock<GroupParams> = OnceLock::new();
    CELL.get_or_init(|| by_name("toy-64bit").expect("preset is valid"))
}

pub fn modp_2048_256() -> &'static GroupParams {
    static CELL: OnceLock<GroupParams> = OnceLock::new();
    CELL.get_or_init(|| {
        let big = |s| parse_decimal(s).expect("preset constant");
        GroupParams::validate(
            big(MODP_2048_P),
            big(MODP_2048_Q),
            big(MODP_2048_G),
            Profile::Production,
        )
        .expect("modp-2048-256 is valid")
    })
}

pub fn by_name(name: &str) -> Option<GroupParams> {
    if name == "modp-2048-256" {
        return Some(modp_2048_256().clone());
    }
    TOY_GROUPS
        .iter()
        .find(|(n, ..)| *n == name)
        .map(|&(_, p, q, g)| {
            GroupParams::validate(
                BigUint::from(p),
                BigUint::from(q),
                BigUint::from(g),
                Profile::Toy,
            )
            .expect("toy preset is valid")
        })
}
