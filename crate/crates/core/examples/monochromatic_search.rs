//! Build a six-region colouring of a small cube and search it exhaustively
//! for monochromatic subcubes.

use poset_ramsey::oracle::{
    build_colouring, elems_from_mask, find_monochromatic_copy, Colour, ColouringSpec, SetFamily,
};

fn main() {
    // A 5-cube with all pivot families empty: a pure layered colouring.
    let spec = ColouringSpec {
        big_n: 5,
        n: 3,
        thresholds: [1, 2, 3, 4, 5],
        s1: SetFamily::empty(1),
        t1: SetFamily::empty(2),
        s2: SetFamily::empty(3),
        t2: SetFamily::empty(4),
    };
    let colouring = build_colouring(spec).unwrap();

    for n in 1..=3u32 {
        match find_monochromatic_copy(|a| colouring.colour(a), 5, n).unwrap() {
            Some(copy) => {
                let images: Vec<Vec<u32>> = copy
                    .embedding
                    .images()
                    .iter()
                    .map(|&m| elems_from_mask(m))
                    .collect();
                let colour = match copy.colour {
                    Colour::Blue => "blue",
                    Colour::Red => "red",
                };
                println!("n = {n}: found a {colour} copy with images {images:?}");
            }
            None => println!("n = {n}: no monochromatic copy"),
        }
    }
}
