use super::{centered, cub, cub_tilt, cyl, grid2x2, line, p, rot_y, trans, Category, ParamRange, Params, Template};
use crate::dsl::Semantics::*;
use crate::dsl::{Program, Statement};

const C: i32 = 15;

fn chair(id: &'static str, extra: Vec<ParamRange>, build: fn(&Params) -> Program, feasible: fn(&Params) -> bool) -> Template {
    let mut ranges = vec![
        p("depth", 12, 18),
        p("width", 12, 20),
        p("seat_height", 7, 13),
        p("seat", 1, 2),
        p("back_height", 8, 14),
        p("back", 1, 2),
    ];
    ranges.extend(extra);
    Template {
        id,
        category: Category::Chair,
        ranges,
        build,
        feasible,
    }
}

/// Seat footprint and heights; the back stands on the `x0` edge.
struct Frame {
    x0: i32,
    z0: i32,
    d: i32,
    w: i32,
    sh: i32,
    st: i32,
    bh: i32,
    bt: i32,
}

impl Frame {
    fn new(q: &Params) -> Self {
        let (d, w) = (q.get("depth"), q.get("width"));
        Frame {
            x0: centered(d),
            z0: centered(w),
            d,
            w,
            sh: q.get("seat_height"),
            st: q.get("seat"),
            bh: q.get("back_height"),
            bt: q.get("back"),
        }
    }

    fn above_seat(&self) -> i32 {
        self.sh + self.st
    }

    fn seat(&self) -> Statement {
        cub(Top, [self.x0, self.sh, self.z0], self.st, self.d, self.w)
    }

    fn back(&self) -> Statement {
        cub(Back, [self.x0, self.above_seat(), self.z0], self.bh, self.bt, self.w)
    }

    fn legs(&self, l: i32) -> Statement {
        grid2x2(self.d - l, self.w - l, cub(Leg, [self.x0, 0, self.z0], self.sh, l, l))
    }
}

fn always(_: &Params) -> bool {
    true
}

pub(super) fn templates() -> Vec<Template> {
    vec![
        chair(
            "chair/four-legs",
            vec![p("leg", 1, 2), p("recline", 0, 15)],
            |q| {
                let f = Frame::new(q);
                let recline = q.get("recline");
                let back = if recline == 0 {
                    f.back()
                } else {
                    cub_tilt(Back, [f.x0, f.above_seat(), f.z0], f.bh, f.bt, f.w, -recline)
                };
                Program::new(vec![f.legs(q.get("leg")), f.seat(), back])
            },
            always,
        ),
        chair(
            "chair/bar-back",
            vec![p("leg", 1, 2), p("post", 1, 2), p("bars", 2, 4), p("gap", 2, 4)],
            |q| {
                let f = Frame::new(q);
                let (post, n, gap) = (q.get("post"), q.get("bars"), q.get("gap"));
                let top_bar = f.above_seat() + f.bh - 1;
                Program::new(vec![
                    f.legs(q.get("leg")),
                    f.seat(),
                    trans(
                        2,
                        [0, 0, f.w - post],
                        vec![cub(BackSupport, [f.x0, f.above_seat(), f.z0], f.bh, f.bt, post)],
                    ),
                    trans(
                        n,
                        [0, gap, 0],
                        vec![cub(
                            HorizontalBar,
                            [f.x0, top_bar - (n - 1) * gap, f.z0 + post],
                            1,
                            f.bt,
                            f.w - 2 * post,
                        )],
                    ),
                ])
            },
            |q| (q.get("bars") - 1) * q.get("gap") <= q.get("back_height") - 2,
        ),
        chair(
            "chair/armchair",
            vec![p("leg", 1, 2), p("arm", 3, 6)],
            |q| {
                let f = Frame::new(q);
                let arm = q.get("arm");
                Program::new(vec![
                    f.legs(q.get("leg")),
                    f.seat(),
                    f.back(),
                    trans(
                        2,
                        [0, 0, f.w - 1],
                        vec![cub(ChairBeam, [f.x0, f.above_seat() + arm, f.z0], 1, f.d, 1)],
                    ),
                    trans(
                        2,
                        [0, 0, f.w - 1],
                        vec![cub(VerticalBoard, [f.x0 + f.d - 1, f.above_seat(), f.z0], arm, 1, 1)],
                    ),
                ])
            },
            |q| q.get("arm") < q.get("back_height"),
        ),
        chair(
            "chair/swivel",
            vec![p("support", 1, 2), p("foot", 2, 4), p("spread", 5, 8), p("feet", 3, 5)],
            |q| {
                let f = Frame::new(q);
                let foot = q.get("foot");
                Program::new(vec![
                    cyl(Support, [C, foot, C], f.sh - foot, q.get("support")),
                    rot_y(q.get("feet"), vec![line(Leg, [C, foot, C], [C - q.get("spread"), 0, C])]),
                    f.seat(),
                    f.back(),
                ])
            },
            always,
        ),
        chair(
            "chair/round-seat",
            vec![
                p("radius", 6, 9),
                p("support", 1, 2),
                p("base_radius", 4, 7),
                p("base", 1, 2),
                p("post_offset", 2, 3),
                p("panel", 3, 6),
            ],
            |q| {
                let f = Frame::new(q);
                let (r, b, k, panel) = (q.get("radius"), q.get("base"), q.get("post_offset"), q.get("panel"));
                let bx = C - r + 1;
                let y = f.above_seat();
                Program::new(vec![
                    cyl(Base, [C, 0, C], b, q.get("base_radius")),
                    cyl(Support, [C, b, C], f.sh - b, q.get("support")),
                    cyl(Top, [C, f.sh, C], f.st, r),
                    trans(2, [0, 0, 2 * k], vec![cub(BackSupport, [bx, y, C - k], f.bh - panel, 1, 1)]),
                    cub(Back, [bx, y + f.bh - panel, C - k], panel, 1, 2 * k + 1),
                ])
            },
            |q| {
                let (r, k) = (q.get("radius"), q.get("post_offset"));
                k * k <= 2 * r - 1 && q.get("panel") < q.get("back_height") && q.get("base_radius") >= q.get("support") + 2
            },
        ),
        chair(
            "chair/sideboards",
            vec![p("board", 1, 2)],
            |q| {
                let f = Frame::new(q);
                let b = q.get("board");
                Program::new(vec![
                    trans(2, [0, 0, f.w - b], vec![cub(Sideboard, [f.x0, 0, f.z0], f.sh, f.d, b)]),
                    f.seat(),
                    f.back(),
                ])
            },
            always,
        ),
        chair(
            "chair/slat-back",
            vec![p("leg", 1, 2), p("slats", 2, 5), p("gap", 2, 4)],
            |q| {
                let f = Frame::new(q);
                let (n, gap) = (q.get("slats"), q.get("gap"));
                let y = f.above_seat();
                Program::new(vec![
                    f.legs(q.get("leg")),
                    f.seat(),
                    trans(
                        n,
                        [0, 0, gap],
                        vec![cub(VerticalBoard, [f.x0, y, f.z0 + 1], f.bh - 1, f.bt, 1)],
                    ),
                    cub(Back, [f.x0, y + f.bh - 1, f.z0], 1, f.bt, f.w),
                ])
            },
            |q| 1 + (q.get("slats") - 1) * q.get("gap") <= q.get("width") - 2,
        ),
    ]
}
