use super::metric::{inverse, Metric};
use crate::error::Result;
use crate::grid::GridField;

/// Centered time derivative; one-sided second order on the first and last level.
pub fn d_t(f: &GridField) -> GridField {
    let g = f.grid;
    let (nt, nx) = (g.n_t, g.n_x);
    let mut out = GridField::zeros(g);
    let h = 1.0 / (2.0 * g.dt);
    for j in 0..nt {
        for i in 0..nx {
            let v = if nt < 3 {
                (f.at(nt - 1, i) - f.at(0, i)) / ((nt - 1) as f64 * g.dt)
            } else if j == 0 {
                (-3.0 * f.at(0, i) + 4.0 * f.at(1, i) - f.at(2, i)) * h
            } else if j == nt - 1 {
                (3.0 * f.at(j, i) - 4.0 * f.at(j - 1, i) + f.at(j - 2, i)) * h
            } else {
                (f.at(j + 1, i) - f.at(j - 1, i)) * h
            };
            out.set(j, i, v);
        }
    }
    out
}

/// Centered periodic x derivative.
pub fn d_x(f: &GridField) -> GridField {
    let g = f.grid;
    let nx = g.n_x;
    let h = 1.0 / (2.0 * g.dx());
    let mut out = GridField::zeros(g);
    for j in 0..g.n_t {
        let r = f.row(j);
        let o = out.row_mut(j);
        for i in 0..nx {
            o[i] = (r[(i + 1) % nx] - r[(i + nx - 1) % nx]) * h;
        }
    }
    out
}

fn comps(m: &Metric) -> [[&GridField; 2]; 2] {
    [[&m.g_tt, &m.g_tx], [&m.g_tx, &m.g_xx]]
}

/// Scalar curvature with R_{mn} = d_l G^l_{mn} - d_n G^l_{ml} + G^l_{ls} G^s_{mn} - G^l_{ns} G^s_{ml},
/// R = g^{mn} R_{mn}. Conformal check: g = e^{2w} diag(1,-1) gives R = -2 e^{-2w} (w_tt - w_xx).
pub fn scalar_curvature(metric: &Metric) -> Result<GridField> {
    metric.validate()?;
    let grid = metric.grid();
    let g = comps(metric);
    // dg[d][a][b] = d_d g_ab
    let dg: Vec<Vec<Vec<GridField>>> = (0..2)
        .map(|d| (0..2).map(|a| (0..2).map(|b| if d == 0 { d_t(g[a][b]) } else { d_x(g[a][b]) }).collect()).collect())
        .collect();
    let n = grid.len();
    // gam[l][m][n]
    let mut gam: Vec<Vec<Vec<GridField>>> =
        (0..2).map(|_| (0..2).map(|_| (0..2).map(|_| GridField::zeros(grid)).collect()).collect()).collect();
    let mut ginv = vec![[0.0; 3]; n];
    for k in 0..n {
        let gi = inverse([metric.g_tt.data[k], metric.g_tx.data[k], metric.g_xx.data[k]]);
        ginv[k] = gi;
        let up = [[gi[0], gi[1]], [gi[1], gi[2]]];
        for l in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    let mut s = 0.0;
                    for sg in 0..2 {
                        s += up[l][sg] * (dg[a][sg][b].data[k] + dg[b][sg][a].data[k] - dg[sg][a][b].data[k]);
                    }
                    gam[l][a][b].data[k] = 0.5 * s;
                }
            }
        }
    }
    // dgam[d][l][m][n]
    let dgam: Vec<Vec<Vec<Vec<GridField>>>> = (0..2)
        .map(|d| {
            (0..2)
                .map(|l| {
                    (0..2).map(|a| (0..2).map(|b| if d == 0 { d_t(&gam[l][a][b]) } else { d_x(&gam[l][a][b]) }).collect()).collect()
                })
                .collect()
        })
        .collect();
    let mut out = GridField::zeros(grid);
    for k in 0..n {
        let gi = ginv[k];
        let up = [[gi[0], gi[1]], [gi[1], gi[2]]];
        let mut r = 0.0;
        for m in 0..2 {
            for nn in 0..2 {
                let mut ric = 0.0;
                for l in 0..2 {
                    ric += dgam[l][l][m][nn].data[k] - dgam[nn][l][m][l].data[k];
                    for s in 0..2 {
                        ric += gam[l][l][s].data[k] * gam[s][m][nn].data[k] - gam[l][nn][s].data[k] * gam[s][m][l].data[k];
                    }
                }
                r += up[m][nn] * ric;
            }
        }
        out.data[k] = r;
    }
    Ok(out)
}
