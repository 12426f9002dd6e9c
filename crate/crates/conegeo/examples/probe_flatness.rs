use conegeo::connections::*;
use conegeo::surfaces::*;
use conegeo::symmetry_breaking::SubgeometryGauge;
use conegeo::Space;

fn main() {
    let gauge = SubgeometryGauge::euclidean_lie(Space::lie(3));
    let cases: Vec<(&str, SurfaceKind, (f64, f64, f64))> = vec![
        ("catenoid", SurfaceKind::Catenoid { waist: 1.0, v_extent: 1.0 }, (0.0, 1.0, 0.0)),
        ("sphere", SurfaceKind::Sphere { radius: 1.0 }, (1.0, 0.0, -1.0)),
        ("sphere-cmc", SurfaceKind::Sphere { radius: 1.0 }, (0.0, -0.5, 1.0)),
    ];
    let t = 0.3;
    for (name, kind, (a, b, c)) in cases {
        println!("== {name} (a,b,c)=({a},{b},{c}) t={t}");
        let mut prev: Option<(f64, f64)> = None;
        for n in [8usize, 16, 32, 64, 128] {
            let s = make_surface(&kind, n, n).unwrap();
            let ls = lift_surface(&s, &gauge).unwrap();
            let conn = middle_connection(&ls, a, b, c, t);
            let (p, q) = lw_conserved_quantities(&ls, a, b, c, &gauge);
            let f = flatness_residual(&conn);
            let pr = parallel_residual(&conn, &p).unwrap().max(parallel_residual(&conn, &q).unwrap());
            match prev {
                Some((pf, pp)) => println!("n={n:4} flat={f:.3e} (ratio {:.2})  par={pr:.3e} (ratio {:.2})", pf / f, pp / pr),
                None => println!("n={n:4} flat={f:.3e}            par={pr:.3e}"),
            }
            prev = Some((f, pr));
        }
    }
}
