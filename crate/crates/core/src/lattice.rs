//! Small integer linear algebra on `Z^3`: gcds, primitive vectors, the
//! Hermite normal form of a generating set and reduced bases of the plane
//! lattice `h^⊥ ∩ Z^3`.

pub type IVec3 = [i64; 3];

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn gcd3(v: IVec3) -> i64 {
    gcd(gcd(v[0], v[1]), v[2])
}

pub fn dot(a: IVec3, b: IVec3) -> i64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: IVec3, b: IVec3) -> IVec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn add(a: IVec3, b: IVec3) -> IVec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn sub(a: IVec3, b: IVec3) -> IVec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn scale(a: IVec3, s: i64) -> IVec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn neg(a: IVec3) -> IVec3 {
    [-a[0], -a[1], -a[2]]
}

pub fn is_zero(a: IVec3) -> bool {
    a == [0, 0, 0]
}

pub fn norm2(a: IVec3) -> i64 {
    dot(a, a)
}

/// `v / gcd(v)`, or `None` for the zero vector.
pub fn primitive_part(v: IVec3) -> Option<IVec3> {
    let g = gcd3(v);
    (g != 0).then(|| [v[0] / g, v[1] / g, v[2] / g])
}

/// Row-style Hermite normal form of the lattice spanned by `generators`.
///
/// The returned rows are a basis: pivots strictly move right, are positive,
/// and entries above each pivot are reduced into `[0, pivot)`.
pub fn hermite_basis(generators: &[IVec3]) -> Vec<IVec3> {
    let mut rows: Vec<IVec3> = generators.iter().copied().filter(|g| !is_zero(*g)).collect();
    let mut basis: Vec<(usize, IVec3)> = Vec::new();
    let mut col = 0;
    while col < 3 && !rows.is_empty() {
        // Euclid on column `col` until at most one row has a nonzero entry there.
        loop {
            let live: Vec<usize> = (0..rows.len()).filter(|&i| rows[i][col] != 0).collect();
            if live.len() <= 1 {
                break;
            }
            let piv = *live.iter().min_by_key(|&&i| rows[i][col].abs()).unwrap();
            let p = rows[piv];
            for &i in &live {
                if i != piv {
                    let q = rows[i][col].div_euclid(p[col]);
                    rows[i] = sub(rows[i], scale(p, q));
                }
            }
        }
        if let Some(i) = (0..rows.len()).find(|&i| rows[i][col] != 0) {
            let mut r = rows.swap_remove(i);
            if r[col] < 0 {
                r = neg(r);
            }
            basis.push((col, r));
        }
        rows.retain(|r| !is_zero(*r));
        col += 1;
    }
    // Reduce entries above pivots.
    for j in 0..basis.len() {
        let (pc, p) = basis[j];
        for i in 0..j {
            let q = basis[i].1[pc].div_euclid(p[pc]);
            basis[i].1 = sub(basis[i].1, scale(p, q));
        }
    }
    basis.into_iter().map(|(_, r)| r).collect()
}

pub fn rank(generators: &[IVec3]) -> usize {
    hermite_basis(generators).len()
}

/// Integer basis `(u, v)` of `h^⊥ ∩ Z^3` with `u × v = h`, Gauss-reduced so
/// both vectors are short, plus a vector `t` with `h·t = 1`.
///
/// `h` must be primitive.
pub fn plane_basis(h: IVec3) -> (IVec3, IVec3, IVec3) {
    // Column operations U with h·U = (0,…,±1,…,0).
    let mut a = h;
    let mut cols: [IVec3; 3] = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];
    loop {
        let live: Vec<usize> = (0..3).filter(|&i| a[i] != 0).collect();
        if live.len() <= 1 {
            break;
        }
        let piv = *live.iter().min_by_key(|&&i| a[i].abs()).unwrap();
        for &i in &live {
            if i != piv {
                let q = a[i].div_euclid(a[piv]);
                a[i] -= q * a[piv];
                cols[i] = sub(cols[i], scale(cols[piv], q));
            }
        }
    }
    let p = (0..3).find(|&i| a[i] != 0).expect("h must be nonzero");
    debug_assert_eq!(a[p].abs(), 1, "h must be primitive");
    let t = scale(cols[p], a[p].signum());
    let others: Vec<IVec3> = (0..3).filter(|&i| i != p).map(|i| cols[i]).collect();
    let (mut u, mut v) = gauss_reduce(others[0], others[1]);
    if cross(u, v) != h {
        v = neg(v);
    }
    debug_assert_eq!(cross(u, v), h);
    // keep t short: subtract the nearest plane-lattice point
    let t = reduce_against(t, u, v);
    if norm2(u) > norm2(v) {
        // keep u the shorter one while preserving orientation
        let w = u;
        u = v;
        v = neg(w);
    }
    (u, v, t)
}

/// Lagrange–Gauss reduction of a 2-D lattice basis embedded in `Z^3`.
pub fn gauss_reduce(mut a: IVec3, mut b: IVec3) -> (IVec3, IVec3) {
    if norm2(a) > norm2(b) {
        std::mem::swap(&mut a, &mut b);
    }
    loop {
        let n = norm2(a);
        let q = round_div(dot(a, b), n);
        b = sub(b, scale(a, q));
        if norm2(b) >= n {
            return (a, b);
        }
        std::mem::swap(&mut a, &mut b);
    }
}

fn reduce_against(t: IVec3, u: IVec3, v: IVec3) -> IVec3 {
    let mut best = t;
    for i in -3..=3 {
        for j in -3..=3 {
            let c = sub(sub(t, scale(u, i)), scale(v, j));
            if norm2(c) < norm2(best) {
                best = c;
            }
        }
    }
    best
}

fn round_div(a: i64, b: i64) -> i64 {
    let q = a as f64 / b as f64;
    q.round() as i64
}

/// The 48 signed permutation matrices of the cube.
pub fn signed_permutations() -> Vec<[[i64; 3]; 3]> {
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut out = Vec::with_capacity(48);
    for p in PERMS {
        for signs in 0..8 {
            let mut m = [[0i64; 3]; 3];
            for (row, &col) in p.iter().enumerate() {
                m[row][col] = if signs >> row & 1 == 1 { -1 } else { 1 };
            }
            out.push(m);
        }
    }
    out
}

pub fn apply(m: &[[i64; 3]; 3], v: IVec3) -> IVec3 {
    [dot(m[0], v), dot(m[1], v), dot(m[2], v)]
}
