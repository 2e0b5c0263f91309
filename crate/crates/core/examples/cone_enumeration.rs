//! Enumerate the cones of a probe pair exactly and show the complement
//! duality between the two pivot lemmas.

use poset_ramsey::oracle::{
    check_pivot_conditions, dualize, elems_from_mask, enumerate_s_cone, enumerate_t_cone,
    mask_from_elems, GroundSetInstance, LemmaSizes, SetFamily,
};

fn show(label: &str, family: &SetFamily) {
    let pretty: Vec<Vec<u32>> = family.members().iter().map(|&m| elems_from_mask(m)).collect();
    println!("{label} (level {}, {} sets): {pretty:?}", family.level(), family.len());
}

fn main() {
    let below = GroundSetInstance {
        big_n: 7,
        x: mask_from_elems(&[1, 2, 3]),
        p: mask_from_elems(&[4]),
        s: 2,
        t: 0,
        s_cap: 1,
        t_floor: 0,
    };
    show("s-cone", &enumerate_s_cone(&below).unwrap());
    let above = GroundSetInstance {
        big_n: 6,
        x: mask_from_elems(&[1, 2, 3]),
        p: mask_from_elems(&[1, 2, 4, 5]),
        s: 0,
        t: 4,
        s_cap: 0,
        t_floor: 1,
    };
    show("t-cone", &enumerate_t_cone(&above).unwrap());

    let big_n = 6;
    let n = 3;
    let sizes = LemmaSizes::lemma_four(big_n, n);
    let s1 = SetFamily::full_level(big_n, 2).unwrap();
    let t1 = SetFamily::empty(big_n / 2);
    let direct = check_pivot_conditions(&s1, &t1, big_n, n, &sizes).unwrap();
    let dual = check_pivot_conditions(
        &dualize(&t1, big_n).unwrap(),
        &dualize(&s1, big_n).unwrap(),
        big_n,
        n,
        &sizes.dual(big_n, n),
    )
    .unwrap();
    println!("direct verdict: {direct:?}");
    println!("dual verdict:   {dual:?}");
    assert_eq!(direct.condition_one, dual.condition_two);
    assert_eq!(direct.condition_two, dual.condition_one);
}
