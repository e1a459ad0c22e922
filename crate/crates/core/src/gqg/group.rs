use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite group given by its full multiplication table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroup {
    mul: Vec<Vec<usize>>,
    inv: Vec<usize>,
    identity: usize,
    labels: Vec<String>,
}

fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Invalid(msg.into()))
}

impl FiniteGroup {
    /// Validates closure, associativity, identity and inverses.
    pub fn new(mul: Vec<Vec<usize>>, labels: Vec<String>) -> Result<Self> {
        let n = mul.len();
        if n == 0 {
            return invalid("group must be nonempty");
        }
        if labels.len() != n {
            return invalid(format!("{} labels for a group of order {n}", labels.len()));
        }
        if mul
            .iter()
            .any(|row| row.len() != n || row.iter().any(|&x| x >= n))
        {
            return invalid("multiplication table is not an n×n table over 0..n");
        }
        let identity = (0..n).find(|&e| (0..n).all(|g| mul[e][g] == g && mul[g][e] == g));
        let Some(identity) = identity else {
            return invalid("no identity element");
        };
        let mut inv = vec![0; n];
        for g in 0..n {
            match (0..n).find(|&h| mul[g][h] == identity && mul[h][g] == identity) {
                Some(h) => inv[g] = h,
                None => return invalid(format!("element {g} has no inverse")),
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if mul[mul[a][b]][c] != mul[a][mul[b][c]] {
                        return invalid(format!("associativity fails at ({a}, {b}, {c})"));
                    }
                }
            }
        }
        Ok(FiniteGroup {
            mul,
            inv,
            identity,
            labels,
        })
    }

    pub fn order(&self) -> usize {
        self.mul.len()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, g: usize, h: usize) -> usize {
        self.mul[g][h]
    }

    pub fn inv(&self, g: usize) -> usize {
        self.inv[g]
    }

    pub fn label(&self, g: usize) -> &str {
        &self.labels[g]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.mul
    }

    pub fn find(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn product(&self, gs: &[usize]) -> usize {
        gs.iter().fold(self.identity, |acc, &g| self.mul(acc, g))
    }

    /// `g h g⁻¹`.
    pub fn conjugate(&self, g: usize, h: usize) -> usize {
        self.mul(self.mul(g, h), self.inv(g))
    }

    /// `g h g⁻¹ h⁻¹`.
    pub fn commutator(&self, g: usize, h: usize) -> usize {
        self.product(&[g, h, self.inv(g), self.inv(h)])
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order()).all(|g| (0..self.order()).all(|h| self.mul(g, h) == self.mul(h, g)))
    }

    /// `[G, G]`: closure of all commutators under multiplication.
    pub fn commutator_subgroup(&self) -> BTreeSet<usize> {
        let n = self.order();
        let gens: BTreeSet<usize> = (0..n)
            .flat_map(|g| (0..n).map(move |h| (g, h)))
            .map(|(g, h)| self.commutator(g, h))
            .collect();
        let mut set: BTreeSet<usize> = BTreeSet::from([self.identity]);
        let mut frontier: Vec<usize> = vec![self.identity];
        while let Some(x) = frontier.pop() {
            for &c in &gens {
                let y = self.mul(x, c);
                if set.insert(y) {
                    frontier.push(y);
                }
            }
        }
        set
    }

    /// `Z_n` with labels `0, …, n−1`.
    pub fn cyclic(n: usize) -> Result<Self> {
        let mul = (0..n)
            .map(|a| (0..n).map(|b| (a + b) % n).collect())
            .collect();
        Self::new(mul, (0..n).map(|a| a.to_string()).collect())
    }

    /// `Z₂ × Z₂` with elements encoded as bit pairs.
    pub fn klein() -> Result<Self> {
        let mul = (0..4).map(|a| (0..4).map(|b| a ^ b).collect()).collect();
        Self::new(mul, ["e", "a", "b", "ab"].map(String::from).to_vec())
    }

    /// A group of permutations of `{0, …, k−1}` listed explicitly, composed as
    /// `(gh)(x) = g(h(x))`.
    pub fn from_permutations(perms: &[Vec<usize>], labels: Vec<String>) -> Result<Self> {
        let find = |p: &Vec<usize>| perms.iter().position(|q| q == p);
        let mut mul = Vec::with_capacity(perms.len());
        for g in perms {
            let mut row = Vec::with_capacity(perms.len());
            for h in perms {
                let gh: Vec<usize> = h.iter().map(|&x| g[x]).collect();
                match find(&gh) {
                    Some(k) => row.push(k),
                    None => return invalid("permutation list is not closed under composition"),
                }
            }
            mul.push(row);
        }
        Self::new(mul, labels)
    }

    /// The permutations of `{0,1,2}`; labels are cycle notation on `{1,2,3}`.
    pub fn s3() -> Result<Self> {
        Self::from_permutations(&s3_permutations(), S3_LABELS.map(String::from).to_vec())
    }

    /// Symmetries of the square acting on its vertices `0..4`.
    pub fn d4() -> Result<Self> {
        Self::from_permutations(&d4_permutations(), D4_LABELS.map(String::from).to_vec())
    }
}

const S3_LABELS: [&str; 6] = ["e", "(12)", "(13)", "(23)", "(123)", "(132)"];
const D4_LABELS: [&str; 8] = ["e", "r", "r2", "r3", "s", "sr", "sr2", "sr3"];

fn s3_permutations() -> Vec<Vec<usize>> {
    vec![
        vec![0, 1, 2],
        vec![1, 0, 2],
        vec![2, 1, 0],
        vec![0, 2, 1],
        vec![1, 2, 0],
        vec![2, 0, 1],
    ]
}

fn d4_permutations() -> Vec<Vec<usize>> {
    let r = |k: usize| (0..4).map(|x| (x + k) % 4).collect::<Vec<_>>();
    let s: Vec<usize> = vec![0, 3, 2, 1];
    let mut out: Vec<Vec<usize>> = (0..4).map(r).collect();
    for k in 0..4 {
        let rk = r(k);
        out.push(rk.iter().map(|&x| s[x]).collect());
    }
    out
}

/// A left action of a finite group on a finite set by permutations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupAction {
    group: FiniteGroup,
    perm: Vec<Vec<usize>>,
}

impl GroupAction {
    /// Checks that every entry is a permutation and `perm(gh) = perm(g)∘perm(h)`.
    pub fn new(group: FiniteGroup, perm: Vec<Vec<usize>>) -> Result<Self> {
        if perm.len() != group.order() {
            return invalid("one permutation per group element is required");
        }
        let points = perm.first().map_or(0, Vec::len);
        if points == 0 {
            return invalid("the action needs at least one point");
        }
        for p in &perm {
            let mut seen = vec![false; points];
            if p.len() != points
                || p.iter()
                    .any(|&x| x >= points || std::mem::replace(&mut seen[x], true))
            {
                return invalid("action entry is not a permutation of the point set");
            }
        }
        for g in 0..group.order() {
            for h in 0..group.order() {
                let gh = group.mul(g, h);
                if (0..points).any(|x| perm[gh][x] != perm[g][perm[h][x]]) {
                    return invalid(format!("action is not a homomorphism at ({g}, {h})"));
                }
            }
        }
        Ok(GroupAction { group, perm })
    }

    /// Every element acts as the identity on `points` points.
    pub fn trivial(group: FiniteGroup, points: usize) -> Result<Self> {
        let perm = vec![(0..points).collect(); group.order()];
        Self::new(group, perm)
    }

    /// Left multiplication on the group itself.
    pub fn regular(group: FiniteGroup) -> Result<Self> {
        let perm = (0..group.order())
            .map(|g| (0..group.order()).map(|h| group.mul(g, h)).collect())
            .collect();
        Self::new(group, perm)
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn points(&self) -> usize {
        self.perm[0].len()
    }

    /// Image of point `x` under `g`.
    pub fn apply(&self, g: usize, x: usize) -> usize {
        self.perm[g][x]
    }

    pub fn is_trivial(&self) -> bool {
        self.perm
            .iter()
            .all(|p| p.iter().enumerate().all(|(i, &x)| i == x))
    }

    /// `σ_g(a)(x) = a(g⁻¹x)`.
    pub fn act_on_function<T: Copy>(&self, g: usize, a: &[T]) -> Vec<T> {
        let gi = self.group.inv(g);
        (0..self.points()).map(|x| a[self.apply(gi, x)]).collect()
    }
}

/// On-disk form: `{order, mul, action, labels}`; `action` may be omitted
/// (trivial action on one point).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroupSpec {
    pub order: usize,
    pub mul: Vec<Vec<usize>>,
    #[serde(default)]
    pub action: Option<Vec<Vec<usize>>>,
    #[serde(default)]
    pub labels: Option<Vec<String>>,
}

impl GroupSpec {
    pub fn into_action(self) -> Result<GroupAction> {
        if self.mul.len() != self.order {
            return invalid(format!(
                "order {} does not match a table with {} rows",
                self.order,
                self.mul.len()
            ));
        }
        let labels = self
            .labels
            .unwrap_or_else(|| (0..self.order).map(|g| g.to_string()).collect());
        let group = FiniteGroup::new(self.mul, labels)?;
        match self.action {
            Some(perm) => GroupAction::new(group, perm),
            None => GroupAction::trivial(group, 1),
        }
    }
}

/// Loads a group action from a JSON file in [`GroupSpec`] form.
pub fn load_action(path: &Path) -> Result<GroupAction> {
    let text = std::fs::read_to_string(path)?;
    let spec: GroupSpec = serde_json::from_str(&text)?;
    spec.into_action()
}

/// Built-in actions: `s3` (on `{1,2,3}`), `d4` (on the square's vertices),
/// `klein` and `z<n>` (regular actions).
pub fn builtin_action(name: &str) -> Result<GroupAction> {
    let lower = name.to_ascii_lowercase();
    match lower.as_str() {
        "s3" => GroupAction::new(FiniteGroup::s3()?, s3_permutations()),
        "d4" => GroupAction::new(FiniteGroup::d4()?, d4_permutations()),
        "klein" | "z2xz2" | "z2z2" => GroupAction::regular(FiniteGroup::klein()?),
        _ => match lower
            .strip_prefix('z')
            .and_then(|n| n.parse::<usize>().ok())
        {
            Some(n) if n >= 1 => GroupAction::regular(FiniteGroup::cyclic(n)?),
            _ => invalid(format!("unknown built-in group '{name}'")),
        },
    }
}
