use super::{centered, cub, cyl, grid2x2, p, rot_y, sqr, trans, Category, Params, Template};
use crate::dsl::Program;
use crate::dsl::Semantics::*;

/// Grid-center voxel used by round and square pedestal parts.
const C: i32 = 15;

fn table(
    id: &'static str,
    ranges: Vec<super::ParamRange>,
    build: fn(&Params) -> Program,
    feasible: fn(&Params) -> bool,
) -> Template {
    Template {
        id,
        category: Category::Table,
        ranges,
        build,
        feasible,
    }
}

struct Frame {
    x0: i32,
    z0: i32,
    d: i32,
    w: i32,
    h: i32,
}

fn frame(q: &Params) -> Frame {
    let (d, w) = (q.get("depth"), q.get("width"));
    Frame {
        x0: centered(d),
        z0: centered(w),
        d,
        w,
        h: q.get("height"),
    }
}

fn legs_fit(q: &Params) -> bool {
    let (i, l) = (q.get("inset"), q.get("leg"));
    q.get("depth") - 2 * i - 2 * l >= 2 && q.get("width") - 2 * i - 2 * l >= 2
}

fn four_legs(f: &Frame, q: &Params) -> crate::dsl::Statement {
    let (i, l) = (q.get("inset"), q.get("leg"));
    grid2x2(f.d - 2 * i - l, f.w - 2 * i - l, cub(Leg, [f.x0 + i, 0, f.z0 + i], f.h, l, l))
}

fn rect_top(f: &Frame, q: &Params) -> crate::dsl::Statement {
    cub(Top, [f.x0, f.h, f.z0], q.get("top"), f.d, f.w)
}

fn leg_ranges() -> Vec<super::ParamRange> {
    vec![
        p("depth", 16, 28),
        p("width", 16, 28),
        p("height", 10, 20),
        p("top", 1, 3),
        p("leg", 1, 3),
        p("inset", 0, 2),
    ]
}

pub(super) fn templates() -> Vec<Template> {
    vec![
        table(
            "table/four-legs",
            leg_ranges(),
            |q| {
                let f = frame(q);
                Program::new(vec![rect_top(&f, q), four_legs(&f, q)])
            },
            legs_fit,
        ),
        table(
            "table/round-pedestal",
            vec![
                p("radius", 7, 13),
                p("height", 10, 20),
                p("top", 1, 2),
                p("support", 1, 3),
                p("base_radius", 3, 8),
                p("base", 1, 2),
            ],
            |q| {
                let (h, b) = (q.get("height"), q.get("base"));
                Program::new(vec![
                    cyl(Top, [C, h, C], q.get("top"), q.get("radius")),
                    cyl(Support, [C, b, C], h - b, q.get("support")),
                    cyl(Base, [C, 0, C], b, q.get("base_radius")),
                ])
            },
            |q| q.get("base_radius") >= q.get("support") + 2 && q.get("base_radius") < q.get("radius"),
        ),
        table(
            "table/sideboards",
            vec![
                p("depth", 14, 26),
                p("width", 16, 28),
                p("height", 10, 20),
                p("top", 1, 3),
                p("board", 1, 3),
            ],
            |q| {
                let f = frame(q);
                let b = q.get("board");
                Program::new(vec![
                    rect_top(&f, q),
                    trans(2, [0, 0, f.w - b], vec![cub(Sideboard, [f.x0, 0, f.z0], f.h, f.d, b)]),
                ])
            },
            |q| q.get("width") - 2 * q.get("board") >= 4,
        ),
        table(
            "table/legs-and-shelf",
            {
                let mut r = leg_ranges();
                r.push(p("shelf", 2, 7));
                r
            },
            |q| {
                let f = frame(q);
                let i = q.get("inset");
                Program::new(vec![
                    rect_top(&f, q),
                    four_legs(&f, q),
                    cub(Layer, [f.x0 + i, q.get("shelf"), f.z0 + i], 1, f.d - 2 * i, f.w - 2 * i),
                ])
            },
            |q| legs_fit(q) && q.get("shelf") <= q.get("height") - 3,
        ),
        table(
            "table/locker",
            vec![
                p("depth", 14, 24),
                p("width", 18, 28),
                p("height", 10, 18),
                p("top", 1, 2),
                p("locker", 5, 9),
                p("leg", 1, 3),
            ],
            |q| {
                let f = frame(q);
                let l = q.get("leg");
                Program::new(vec![
                    rect_top(&f, q),
                    cub(Locker, [f.x0, 0, f.z0], f.h, f.d, q.get("locker")),
                    trans(2, [f.d - l, 0, 0], vec![cub(Leg, [f.x0, 0, f.z0 + f.w - l], f.h, l, l)]),
                ])
            },
            |q| q.get("width") - q.get("locker") - q.get("leg") >= 4,
        ),
        table(
            "table/round-splayed",
            vec![
                p("radius", 8, 13),
                p("height", 10, 20),
                p("top", 1, 2),
                p("spread", 3, 9),
                p("legs", 3, 5),
                p("leg", 0, 1),
            ],
            |q| {
                let h = q.get("height");
                Program::new(vec![
                    cyl(Top, [C, h, C], q.get("top"), q.get("radius")),
                    rot_y(q.get("legs"), vec![cyl(Leg, [C - q.get("spread"), 0, C], h, q.get("leg"))]),
                ])
            },
            |q| q.get("spread") + q.get("leg") + 2 <= q.get("radius"),
        ),
        table(
            "table/square-pedestal",
            vec![
                p("radius", 7, 13),
                p("height", 10, 20),
                p("top", 1, 2),
                p("support", 0, 2),
                p("base_radius", 3, 7),
                p("base", 1, 2),
                p("feet", 0, 1),
            ],
            |q| {
                let (h, b) = (q.get("height"), q.get("base"));
                let rb = q.get("base_radius");
                let mut s = vec![
                    sqr(Top, [C, h, C], q.get("top"), q.get("radius")),
                    sqr(Support, [C, b, C], h - b, q.get("support")),
                ];
                if q.get("feet") == 1 {
                    // four corner feet instead of a solid plate
                    s.push(grid2x2(2 * rb, 2 * rb, sqr(Base, [C - rb, 0, C - rb], b, 1)));
                    s.push(sqr(Base, [C, b - 1, C], 1, rb));
                } else {
                    s.push(trans(2, [0, b, 0], vec![sqr(Base, [C, 0, C], b, rb)]));
                }
                Program::new(s)
            },
            |q| q.get("base_radius") >= q.get("support") + 2 && q.get("base_radius") + 2 <= q.get("radius"),
        ),
        table(
            "table/legs-with-bars",
            {
                let mut r = leg_ranges();
                r.push(p("bar", 2, 7));
                r
            },
            |q| {
                let f = frame(q);
                let (i, l) = (q.get("inset"), q.get("leg"));
                Program::new(vec![
                    rect_top(&f, q),
                    four_legs(&f, q),
                    trans(
                        2,
                        [0, 0, f.w - 2 * i - l],
                        vec![cub(HorizontalBar, [f.x0 + i, q.get("bar"), f.z0 + i], 1, f.d - 2 * i, l)],
                    ),
                ])
            },
            |q| legs_fit(q) && q.get("bar") <= q.get("height") - 3,
        ),
        table(
            "table/two-tier",
            {
                let mut r = leg_ranges();
                r.push(p("gap", 4, 10));
                r
            },
            |q| {
                let f = frame(q);
                let gap = q.get("gap");
                Program::new(vec![
                    four_legs(&f, q),
                    trans(
                        2,
                        [0, gap, 0],
                        vec![cub(Layer, [f.x0, f.h - gap, f.z0], q.get("top"), f.d, f.w)],
                    ),
                ])
            },
            |q| legs_fit(q) && q.get("gap") <= q.get("height") - 3 && q.get("gap") > q.get("top"),
        ),
        table(
            "table/sideboards-and-shelf",
            vec![
                p("depth", 14, 26),
                p("width", 16, 28),
                p("height", 10, 20),
                p("top", 1, 3),
                p("board", 1, 3),
                p("shelf", 2, 8),
            ],
            |q| {
                let f = frame(q);
                let b = q.get("board");
                Program::new(vec![
                    rect_top(&f, q),
                    trans(2, [0, 0, f.w - b], vec![cub(Sideboard, [f.x0, 0, f.z0], f.h, f.d, b)]),
                    cub(Layer, [f.x0, q.get("shelf"), f.z0 + b], 1, f.d, f.w - 2 * b),
                ])
            },
            |q| q.get("width") - 2 * q.get("board") >= 4 && q.get("shelf") <= q.get("height") - 3,
        ),
    ]
}
