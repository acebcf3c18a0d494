//! Algebraic decision diagrams over extended integer terminals.
//!
//! An [`AddManager`] owns a hash-consed node store for reduced, ordered
//! decision diagrams representing pseudo-Boolean functions `B^n -> Value`.
//! Reduction plus hash-consing make handles canonical: two [`Add`]s rooted in
//! the same manager denote the same function if and only if they are equal.
//!
//! The manager uses interior mutability and is meant to be confined to one
//! thread; separate managers on separate threads are independent. Nodes are
//! never freed before the manager itself is dropped, so handles stay valid for
//! the manager's lifetime and "releasing" an Add is purely an accounting
//! notion (see [`AddManager::live_count`]).

use std::cell::{Cell, RefCell};
use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::types::{Assignment, Quant, Var};
use crate::value::Value;

/// Errors surfaced by diagram construction and operations.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AddError {
    #[error("weight arithmetic overflow")]
    Overflow,
    #[error("value outside the representable weight range")]
    ReservedValue,
    #[error("operands belong to different managers")]
    ManagerMismatch,
    #[error("variable {0} out of range for this manager")]
    UnknownVariable(Var),
    #[error("{0} does not precede the operand supports in the variable order")]
    OrderViolation(Var),
    #[error("composition guide is not 0/1-valued")]
    GuideNotBoolean,
    #[error("composition guide depends on the substituted variable {0}")]
    GuideDependsOnVariable(Var),
    #[error("evaluation requires a value for {0}")]
    UnassignedVariable(Var),
}

impl From<crate::value::Overflow> for AddError {
    fn from(_: crate::value::Overflow) -> AddError {
        AddError::Overflow
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
struct NodeId(u32);

/// Level assigned to terminals; orders below every variable level.
const LEVEL_TERMINAL: u32 = u32::MAX;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Node {
    Terminal(Value),
    Inner { level: u32, low: NodeId, high: NodeId },
}

impl Node {
    fn level(self) -> u32 {
        match self {
            Node::Terminal(_) => LEVEL_TERMINAL,
            Node::Inner { level, .. } => level,
        }
    }
}

/// Handle to a diagram rooted in some manager. Copyable; validity follows the
/// manager's lifetime. Handle equality is function equality within a manager.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Add {
    mgr: u64,
    root: NodeId,
}

const OP_SUM: u8 = 0;
const OP_MAX: u8 = 1;
const OP_MIN: u8 = 2;
const OP_DIFF: u8 = 3;
const OP_PROJECT_MAX: u8 = 4;
const OP_PROJECT_MIN: u8 = 5;
const OP_DERIVATIVE: u8 = 6;
const OP_SIGN: u8 = 7;
const OP_PRUNE: u8 = 8;
const OP_RESTRICT: u8 = 9;
const OP_SELECT: u8 = 10;

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
struct CacheKey {
    op: u8,
    a: NodeId,
    b: NodeId,
    aux: i64,
}

static NEXT_MANAGER_ID: AtomicU64 = AtomicU64::new(1);

/// Node store plus operation caches for one diagram universe.
pub struct AddManager {
    id: u64,
    num_vars: u32,
    var_to_level: Vec<u32>,
    level_to_var: Vec<Var>,
    nodes: RefCell<Vec<Node>>,
    unique: RefCell<HashMap<(u32, NodeId, NodeId), NodeId>>,
    terminals: RefCell<HashMap<Value, NodeId>>,
    cache: RefCell<HashMap<CacheKey, NodeId>>,
    cache_cap: Cell<Option<usize>>,
}

impl AddManager {
    /// Manager over variables `1..=num_vars` in index order.
    pub fn new(num_vars: u32) -> AddManager {
        let order: Vec<Var> = (1..=num_vars).map(Var).collect();
        AddManager::with_order(num_vars, &order).expect("index order is a permutation")
    }

    /// Manager whose variable order is the given permutation of `1..=num_vars`
    /// from top (tested first) to bottom.
    pub fn with_order(num_vars: u32, order: &[Var]) -> Result<AddManager, AddError> {
        let mut var_to_level = vec![u32::MAX; num_vars as usize];
        for (level, &v) in order.iter().enumerate() {
            if v.0 == 0 || v.0 > num_vars {
                return Err(AddError::UnknownVariable(v));
            }
            if var_to_level[v.idx()] != u32::MAX {
                return Err(AddError::OrderViolation(v));
            }
            var_to_level[v.idx()] = level as u32;
        }
        if order.len() != num_vars as usize {
            let missing = var_to_level
                .iter()
                .position(|&l| l == u32::MAX)
                .map(|i| Var(i as u32 + 1))
                .unwrap_or(Var(num_vars + 1));
            return Err(AddError::UnknownVariable(missing));
        }
        Ok(AddManager {
            id: NEXT_MANAGER_ID.fetch_add(1, Ordering::Relaxed),
            num_vars,
            var_to_level,
            level_to_var: order.to_vec(),
            nodes: RefCell::new(Vec::new()),
            unique: RefCell::new(HashMap::new()),
            terminals: RefCell::new(HashMap::new()),
            cache: RefCell::new(HashMap::new()),
            cache_cap: Cell::new(None),
        })
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    /// Variable order from top to bottom.
    pub fn order(&self) -> &[Var] {
        &self.level_to_var
    }

    /// Total nodes ever allocated in this manager.
    pub fn allocated_nodes(&self) -> usize {
        self.nodes.borrow().len()
    }

    /// Caps the apply cache; the cache is cleared whenever it would grow past
    /// the cap. `None` leaves it unbounded.
    pub fn set_cache_cap(&self, cap: Option<usize>) {
        self.cache_cap.set(cap);
    }

    fn level_of(&self, var: Var) -> Result<u32, AddError> {
        if var.0 == 0 || var.0 > self.num_vars {
            return Err(AddError::UnknownVariable(var));
        }
        Ok(self.var_to_level[var.idx()])
    }

    fn node(&self, id: NodeId) -> Node {
        self.nodes.borrow()[id.0 as usize]
    }

    fn wrap(&self, root: NodeId) -> Add {
        Add { mgr: self.id, root }
    }

    fn unwrap(&self, a: Add) -> Result<NodeId, AddError> {
        if a.mgr != self.id {
            return Err(AddError::ManagerMismatch);
        }
        Ok(a.root)
    }

    fn terminal(&self, v: Value) -> NodeId {
        let mut terminals = self.terminals.borrow_mut();
        match terminals.entry(v) {
            Entry::Occupied(e) => *e.get(),
            Entry::Vacant(e) => {
                let mut nodes = self.nodes.borrow_mut();
                let id = NodeId(nodes.len() as u32);
                nodes.push(Node::Terminal(v));
                *e.insert(id)
            }
        }
    }

    /// Canonical node for branching on `level`; collapses redundant tests.
    fn mk(&self, level: u32, low: NodeId, high: NodeId) -> NodeId {
        if low == high {
            return low;
        }
        let mut unique = self.unique.borrow_mut();
        match unique.entry((level, low, high)) {
            Entry::Occupied(e) => *e.get(),
            Entry::Vacant(e) => {
                let mut nodes = self.nodes.borrow_mut();
                let id = NodeId(nodes.len() as u32);
                nodes.push(Node::Inner { level, low, high });
                *e.insert(id)
            }
        }
    }

    fn cache_get(&self, key: CacheKey) -> Option<NodeId> {
        self.cache.borrow().get(&key).copied()
    }

    fn cache_put(&self, key: CacheKey, result: NodeId) {
        let mut cache = self.cache.borrow_mut();
        if let Some(cap) = self.cache_cap.get() {
            if cache.len() >= cap {
                cache.clear();
            }
        }
        cache.insert(key, result);
    }

    /// Terminal diagram. `v` must be finite or `NEG_INF`.
    pub fn constant(&self, v: Value) -> Result<Add, AddError> {
        if v == Value::POS_INF {
            return Err(AddError::ReservedValue);
        }
        Ok(self.wrap(self.terminal(v)))
    }

    /// Terminal diagram from a raw scaled weight.
    pub fn constant_weight(&self, w: i64) -> Result<Add, AddError> {
        let v = Value::new(w).map_err(|_| AddError::ReservedValue)?;
        self.constant(v)
    }

    /// Canonical node testing `var`, which must precede the supports of both
    /// branches in the variable order.
    pub fn ite_node(&self, var: Var, high: Add, low: Add) -> Result<Add, AddError> {
        let h = self.unwrap(high)?;
        let l = self.unwrap(low)?;
        let level = self.level_of(var)?;
        if level >= self.node(h).level() || level >= self.node(l).level() {
            return Err(AddError::OrderViolation(var));
        }
        Ok(self.wrap(self.mk(level, l, h)))
    }

    /// Pointwise sum. `NEG_INF` absorbs.
    pub fn sum(&self, a: Add, b: Add) -> Result<Add, AddError> {
        let (a, b) = (self.unwrap(a)?, self.unwrap(b)?);
        Ok(self.wrap(self.apply_bin(OP_SUM, a, b)?))
    }

    /// Pointwise binary maximum.
    pub fn max(&self, a: Add, b: Add) -> Result<Add, AddError> {
        let (a, b) = (self.unwrap(a)?, self.unwrap(b)?);
        Ok(self.wrap(self.apply_bin(OP_MAX, a, b)?))
    }

    /// Pointwise binary minimum.
    pub fn min(&self, a: Add, b: Add) -> Result<Add, AddError> {
        let (a, b) = (self.unwrap(a)?, self.unwrap(b)?);
        Ok(self.wrap(self.apply_bin(OP_MIN, a, b)?))
    }

    /// Eliminates `var` by taking the max or min of its two cofactors
    /// pointwise. Returns `a` unchanged when `var` is outside the support.
    pub fn project(&self, a: Add, var: Var, mode: Quant) -> Result<Add, AddError> {
        let a = self.unwrap(a)?;
        let level = self.level_of(var)?;
        Ok(self.wrap(self.project_rec(a, level, mode)?))
    }

    /// Discrete derivative with respect to `var`: the `var=1` cofactor minus
    /// the `var=0` cofactor. Zero when `var` is outside the support. Across
    /// `NEG_INF` branches the magnitude saturates; the sign stays exact.
    pub fn derivative(&self, a: Add, var: Var) -> Result<Add, AddError> {
        let a = self.unwrap(a)?;
        let level = self.level_of(var)?;
        Ok(self.wrap(self.derivative_rec(a, level)?))
    }

    /// Maps terminals to 1 where nonnegative and 0 elsewhere (`NEG_INF` to 0).
    pub fn sign(&self, a: Add) -> Result<Add, AddError> {
        let a = self.unwrap(a)?;
        Ok(self.wrap(self.sign_rec(a)?))
    }

    /// Substitutes the 0/1-valued guide `g` for `var`: the result at `b` is
    /// `a` evaluated at `b` with `var` set to `g(b)`.
    pub fn compose(&self, a: Add, var: Var, g: Add) -> Result<Add, AddError> {
        let a = self.unwrap(a)?;
        let g = self.unwrap(g)?;
        let level = self.level_of(var)?;
        if !self.is_boolean(g) {
            return Err(AddError::GuideNotBoolean);
        }
        if self.support_levels(g).contains(&level) {
            return Err(AddError::GuideDependsOnVariable(var));
        }
        let hi = self.restrict_rec(a, level, true)?;
        let lo = self.restrict_rec(a, level, false)?;
        Ok(self.wrap(self.select_rec(g, hi, lo)?))
    }

    /// Fixes `var` to a constant.
    pub fn restrict(&self, a: Add, var: Var, value: bool) -> Result<Add, AddError> {
        let a = self.unwrap(a)?;
        let level = self.level_of(var)?;
        Ok(self.wrap(self.restrict_rec(a, level, value)?))
    }

    /// Replaces every terminal strictly below `floor` with `NEG_INF`.
    pub fn prune(&self, a: Add, floor: i64) -> Result<Add, AddError> {
        let a = self.unwrap(a)?;
        let floor = Value::new(floor).map_err(|_| AddError::ReservedValue)?;
        Ok(self.wrap(self.prune_rec(a, floor)?))
    }

    /// Evaluates at `b`, which must assign every support variable.
    pub fn evaluate(&self, a: Add, b: &Assignment) -> Result<Value, AddError> {
        let a = self.unwrap(a)?;
        for level in self.support_levels(a) {
            let var = self.level_to_var[level as usize];
            if b.get(var).is_none() {
                return Err(AddError::UnassignedVariable(var));
            }
        }
        let mut cur = a;
        loop {
            match self.node(cur) {
                Node::Terminal(v) => return Ok(v),
                Node::Inner { level, low, high } => {
                    let var = self.level_to_var[level as usize];
                    let on = b.get(var).expect("support was checked");
                    cur = if on { high } else { low };
                }
            }
        }
    }

    /// Support variables, sorted by index.
    pub fn support(&self, a: Add) -> Result<Vec<Var>, AddError> {
        let a = self.unwrap(a)?;
        let mut vars: Vec<Var> = self
            .support_levels(a)
            .into_iter()
            .map(|l| self.level_to_var[l as usize])
            .collect();
        vars.sort_unstable();
        Ok(vars)
    }

    /// Distinct reachable nodes, terminals included.
    pub fn node_count(&self, a: Add) -> Result<usize, AddError> {
        let a = self.unwrap(a)?;
        Ok(self.reachable(&[a]).len())
    }

    /// Distinct nodes reachable from any of the given roots; the shared-store
    /// measure of how much is kept alive by a working set of handles.
    pub fn live_count(&self, roots: &[Add]) -> Result<usize, AddError> {
        let ids = roots
            .iter()
            .map(|&a| self.unwrap(a))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(self.reachable(&ids).len())
    }

    /// Largest terminal value; `NEG_INF` for the all-`NEG_INF` diagram.
    pub fn max_terminal(&self, a: Add) -> Result<Value, AddError> {
        let a = self.unwrap(a)?;
        Ok(self.fold_terminals(a, Value::NEG_INF, Value::max))
    }

    /// Smallest terminal value.
    pub fn min_terminal(&self, a: Add) -> Result<Value, AddError> {
        let a = self.unwrap(a)?;
        Ok(self.fold_terminals(a, Value::POS_INF, Value::min))
    }

    /// True when every terminal is 0 or 1.
    pub fn is_boolean_valued(&self, a: Add) -> Result<bool, AddError> {
        let a = self.unwrap(a)?;
        Ok(self.is_boolean(a))
    }

    /// GraphViz rendering for debugging.
    pub fn to_dot(&self, a: Add, name: &str) -> Result<String, AddError> {
        let a = self.unwrap(a)?;
        let mut out = String::new();
        let _ = writeln!(out, "digraph \"{name}\" {{");
        let _ = writeln!(out, "  ordering=out;");
        for id in self.reachable(&[a]) {
            match self.node(id) {
                Node::Terminal(v) => {
                    let _ = writeln!(out, "  n{} [shape=box, label=\"{v}\"];", id.0);
                }
                Node::Inner { level, low, high } => {
                    let var = self.level_to_var[level as usize];
                    let _ = writeln!(out, "  n{} [shape=circle, label=\"{var}\"];", id.0);
                    let _ = writeln!(out, "  n{} -> n{} [style=dashed];", id.0, low.0);
                    let _ = writeln!(out, "  n{} -> n{};", id.0, high.0);
                }
            }
        }
        let _ = writeln!(out, "  root -> n{};", a.0);
        let _ = writeln!(out, "  root [shape=none, label=\"{name}\"];");
        out.push_str("}\n");
        Ok(out)
    }

    fn reachable(&self, roots: &[NodeId]) -> Vec<NodeId> {
        let mut seen: Vec<bool> = vec![false; self.nodes.borrow().len()];
        let mut stack: Vec<NodeId> = roots.to_vec();
        let mut found = Vec::new();
        while let Some(id) = stack.pop() {
            if std::mem::replace(&mut seen[id.0 as usize], true) {
                continue;
            }
            found.push(id);
            if let Node::Inner { low, high, .. } = self.node(id) {
                stack.push(low);
                stack.push(high);
            }
        }
        found
    }

    fn support_levels(&self, a: NodeId) -> Vec<u32> {
        let mut levels: Vec<u32> = self
            .reachable(&[a])
            .into_iter()
            .filter_map(|id| match self.node(id) {
                Node::Terminal(_) => None,
                Node::Inner { level, .. } => Some(level),
            })
            .collect();
        levels.sort_unstable();
        levels.dedup();
        levels
    }

    fn fold_terminals(&self, a: NodeId, init: Value, f: impl Fn(Value, Value) -> Value) -> Value {
        let mut acc = init;
        for id in self.reachable(&[a]) {
            if let Node::Terminal(v) = self.node(id) {
                acc = f(acc, v);
            }
        }
        acc
    }

    fn is_boolean(&self, a: NodeId) -> bool {
        self.reachable(&[a]).iter().all(|&id| match self.node(id) {
            Node::Terminal(v) => v == Value::ZERO || v == Value::ONE,
            Node::Inner { .. } => true,
        })
    }

    fn apply_bin(&self, op: u8, a: NodeId, b: NodeId) -> Result<NodeId, AddError> {
        let na = self.node(a);
        let nb = self.node(b);
        match op {
            OP_SUM => {
                if let Node::Terminal(v) = na {
                    if v == Value::ZERO {
                        return Ok(b);
                    }
                    if v == Value::NEG_INF {
                        return Ok(a);
                    }
                }
                if let Node::Terminal(v) = nb {
                    if v == Value::ZERO {
                        return Ok(a);
                    }
                    if v == Value::NEG_INF {
                        return Ok(b);
                    }
                }
            }
            OP_MAX => {
                if a == b {
                    return Ok(a);
                }
                if let Node::Terminal(v) = na {
                    if v == Value::NEG_INF {
                        return Ok(b);
                    }
                    if v == Value::POS_INF {
                        return Ok(a);
                    }
                }
                if let Node::Terminal(v) = nb {
                    if v == Value::NEG_INF {
                        return Ok(a);
                    }
                    if v == Value::POS_INF {
                        return Ok(b);
                    }
                }
            }
            OP_MIN => {
                if a == b {
                    return Ok(a);
                }
                if let Node::Terminal(v) = na {
                    if v == Value::NEG_INF {
                        return Ok(a);
                    }
                    if v == Value::POS_INF {
                        return Ok(b);
                    }
                }
                if let Node::Terminal(v) = nb {
                    if v == Value::NEG_INF {
                        return Ok(b);
                    }
                    if v == Value::POS_INF {
                        return Ok(a);
                    }
                }
            }
            OP_DIFF => {
                if a == b {
                    return Ok(self.terminal(Value::ZERO));
                }
            }
            _ => unreachable!("not a binary op"),
        }
        if let (Node::Terminal(va), Node::Terminal(vb)) = (na, nb) {
            let v = match op {
                OP_SUM => va.add(vb)?,
                OP_MAX => va.max(vb),
                OP_MIN => va.min(vb),
                OP_DIFF => va.diff(vb)?,
                _ => unreachable!(),
            };
            return Ok(self.terminal(v));
        }
        let commutative = op != OP_DIFF;
        let key = if commutative && b.0 < a.0 {
            CacheKey { op, a: b, b: a, aux: 0 }
        } else {
            CacheKey { op, a, b, aux: 0 }
        };
        if let Some(r) = self.cache_get(key) {
            return Ok(r);
        }
        let level = na.level().min(nb.level());
        let (a0, a1) = self.cofactors_at(a, na, level);
        let (b0, b1) = self.cofactors_at(b, nb, level);
        let low = self.apply_bin(op, a0, b0)?;
        let high = self.apply_bin(op, a1, b1)?;
        let r = self.mk(level, low, high);
        self.cache_put(key, r);
        Ok(r)
    }

    fn cofactors_at(&self, id: NodeId, node: Node, level: u32) -> (NodeId, NodeId) {
        match node {
            Node::Inner { level: l, low, high } if l == level => (low, high),
            _ => (id, id),
        }
    }

    fn project_rec(&self, a: NodeId, target: u32, mode: Quant) -> Result<NodeId, AddError> {
        let na = self.node(a);
        if na.level() > target {
            return Ok(a);
        }
        let op = match mode {
            Quant::Max => OP_PROJECT_MAX,
            Quant::Min => OP_PROJECT_MIN,
        };
        let key = CacheKey { op, a, b: a, aux: target as i64 };
        if let Some(r) = self.cache_get(key) {
            return Ok(r);
        }
        let combine = match mode {
            Quant::Max => OP_MAX,
            Quant::Min => OP_MIN,
        };
        let r = match na {
            Node::Inner { level, low, high } if level == target => {
                self.apply_bin(combine, low, high)?
            }
            Node::Inner { level, low, high } => {
                let l = self.project_rec(low, target, mode)?;
                let h = self.project_rec(high, target, mode)?;
                self.mk(level, l, h)
            }
            Node::Terminal(_) => unreachable!("terminal level exceeds target"),
        };
        self.cache_put(key, r);
        Ok(r)
    }

    fn derivative_rec(&self, a: NodeId, target: u32) -> Result<NodeId, AddError> {
        let na = self.node(a);
        if na.level() > target {
            return Ok(self.terminal(Value::ZERO));
        }
        let key = CacheKey { op: OP_DERIVATIVE, a, b: a, aux: target as i64 };
        if let Some(r) = self.cache_get(key) {
            return Ok(r);
        }
        let r = match na {
            Node::Inner { level, low, high } if level == target => {
                self.apply_bin(OP_DIFF, high, low)?
            }
            Node::Inner { level, low, high } => {
                let l = self.derivative_rec(low, target)?;
                let h = self.derivative_rec(high, target)?;
                self.mk(level, l, h)
            }
            Node::Terminal(_) => unreachable!("terminal level exceeds target"),
        };
        self.cache_put(key, r);
        Ok(r)
    }

    fn sign_rec(&self, a: NodeId) -> Result<NodeId, AddError> {
        let na = self.node(a);
        if let Node::Terminal(v) = na {
            return Ok(self.terminal(v.sign()));
        }
        let key = CacheKey { op: OP_SIGN, a, b: a, aux: 0 };
        if let Some(r) = self.cache_get(key) {
            return Ok(r);
        }
        let r = match na {
            Node::Inner { level, low, high } => {
                let l = self.sign_rec(low)?;
                let h = self.sign_rec(high)?;
                self.mk(level, l, h)
            }
            Node::Terminal(_) => unreachable!(),
        };
        self.cache_put(key, r);
        Ok(r)
    }

    fn prune_rec(&self, a: NodeId, floor: Value) -> Result<NodeId, AddError> {
        let na = self.node(a);
        if let Node::Terminal(v) = na {
            return Ok(if v < floor { self.terminal(Value::NEG_INF) } else { a });
        }
        let key = CacheKey {
            op: OP_PRUNE,
            a,
            b: a,
            aux: floor.finite().expect("floor is finite"),
        };
        if let Some(r) = self.cache_get(key) {
            return Ok(r);
        }
        let r = match na {
            Node::Inner { level, low, high } => {
                let l = self.prune_rec(low, floor)?;
                let h = self.prune_rec(high, floor)?;
                self.mk(level, l, h)
            }
            Node::Terminal(_) => unreachable!(),
        };
        self.cache_put(key, r);
        Ok(r)
    }

    fn restrict_rec(&self, a: NodeId, target: u32, value: bool) -> Result<NodeId, AddError> {
        let na = self.node(a);
        if na.level() > target {
            return Ok(a);
        }
        let key = CacheKey {
            op: OP_RESTRICT,
            a,
            b: a,
            aux: (target as i64) << 1 | value as i64,
        };
        if let Some(r) = self.cache_get(key) {
            return Ok(r);
        }
        let r = match na {
            Node::Inner { level, low, high } if level == target => {
                if value {
                    high
                } else {
                    low
                }
            }
            Node::Inner { level, low, high } => {
                let l = self.restrict_rec(low, target, value)?;
                let h = self.restrict_rec(high, target, value)?;
                self.mk(level, l, h)
            }
            Node::Terminal(_) => unreachable!(),
        };
        self.cache_put(key, r);
        Ok(r)
    }

    /// Pointwise `if g then a1 else a0`; `g` is 0/1-valued.
    fn select_rec(&self, g: NodeId, a1: NodeId, a0: NodeId) -> Result<NodeId, AddError> {
        if a1 == a0 {
            return Ok(a1);
        }
        let ng = self.node(g);
        if let Node::Terminal(v) = ng {
            return Ok(if v == Value::ONE { a1 } else { a0 });
        }
        let key = CacheKey { op: OP_SELECT, a: g, b: a1, aux: a0.0 as i64 };
        if let Some(r) = self.cache_get(key) {
            return Ok(r);
        }
        let n1 = self.node(a1);
        let n0 = self.node(a0);
        let level = ng.level().min(n1.level()).min(n0.level());
        let (g0, g1) = self.cofactors_at(g, ng, level);
        let (x0, x1) = self.cofactors_at(a1, n1, level);
        let (y0, y1) = self.cofactors_at(a0, n0, level);
        let low = self.select_rec(g0, x0, y0)?;
        let high = self.select_rec(g1, x1, y1)?;
        let r = self.mk(level, low, high);
        self.cache_put(key, r);
        Ok(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mgr2() -> AddManager {
        AddManager::new(2)
    }

    /// Indicator of `x1 v x2` worth 1 when satisfied.
    fn clause_or(m: &AddManager) -> Add {
        let one = m.constant(Value::ONE).unwrap();
        let zero = m.constant(Value::ZERO).unwrap();
        let tail = m.ite_node(Var(2), one, zero).unwrap();
        m.ite_node(Var(1), one, tail).unwrap()
    }

    /// Indicator of `x1 xor x2` worth 1 when satisfied.
    fn xor2(m: &AddManager) -> Add {
        let one = m.constant(Value::ONE).unwrap();
        let zero = m.constant(Value::ZERO).unwrap();
        let if_true = m.ite_node(Var(2), zero, one).unwrap();
        let if_false = m.ite_node(Var(2), one, zero).unwrap();
        m.ite_node(Var(1), if_true, if_false).unwrap()
    }

    #[test]
    fn constants_are_hash_consed() {
        let m = mgr2();
        let a = m.constant_weight(5).unwrap();
        let b = m.constant_weight(5).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, m.constant_weight(6).unwrap());
    }

    #[test]
    fn redundant_test_collapses() {
        let m = mgr2();
        let five = m.constant_weight(5).unwrap();
        assert_eq!(m.ite_node(Var(1), five, five).unwrap(), five);
    }

    #[test]
    fn node_count_includes_terminals() {
        let m = mgr2();
        let five = m.constant_weight(5).unwrap();
        let one = m.constant_weight(1).unwrap();
        let a = m.ite_node(Var(1), five, one).unwrap();
        assert_eq!(m.node_count(a).unwrap(), 3);
    }

    #[test]
    fn sum_identity_and_absorption() {
        let m = mgr2();
        let zero = m.constant(Value::ZERO).unwrap();
        let a = clause_or(&m);
        assert_eq!(m.sum(zero, a).unwrap(), a);
        let ninf = m.constant(Value::NEG_INF).unwrap();
        let three = m.constant_weight(3).unwrap();
        assert_eq!(m.sum(ninf, three).unwrap(), ninf);
    }

    // Sum of the unit-weight or/xor indicators over (x1, x2):
    //   (0,0) -> 0, (0,1) -> 2, (1,0) -> 2, (1,1) -> 1
    fn or_plus_xor(m: &AddManager) -> Add {
        m.sum(clause_or(m), xor2(m)).unwrap()
    }

    #[test]
    fn sum_matches_pointwise_table() {
        let m = mgr2();
        let f = or_plus_xor(&m);
        let expect = [0i64, 2, 2, 1]; // index bit0 = x1, bit1 = x2
        for bits in 0..4u64 {
            let b = Assignment::from_bits(2, bits);
            assert_eq!(
                m.evaluate(f, &b).unwrap(),
                Value::new(expect[bits as usize]).unwrap(),
                "assignment bits {bits:02b}"
            );
        }
    }

    #[test]
    fn derivative_of_sum_table() {
        let m = mgr2();
        let f = or_plus_xor(&m);
        let d = m.derivative(f, Var(1)).unwrap();
        let neg_one = m.constant_weight(-1).unwrap();
        let two = m.constant_weight(2).unwrap();
        let expected = m.ite_node(Var(2), neg_one, two).unwrap();
        assert_eq!(d, expected);
        assert!(!m.support(d).unwrap().contains(&Var(1)));
    }

    #[test]
    fn sign_of_derivative_table() {
        let m = mgr2();
        let f = or_plus_xor(&m);
        let d = m.derivative(f, Var(1)).unwrap();
        let g = m.sign(d).unwrap();
        let one = m.constant(Value::ONE).unwrap();
        let zero = m.constant(Value::ZERO).unwrap();
        let expected = m.ite_node(Var(2), zero, one).unwrap();
        assert_eq!(g, expected);
    }

    #[test]
    fn projection_collapses_to_constant() {
        let m = mgr2();
        let f = or_plus_xor(&m);
        let p = m.project(f, Var(2), Quant::Max).unwrap();
        assert_eq!(p, m.constant_weight(2).unwrap());
        let q = m.project(f, Var(2), Quant::Min).unwrap();
        let one = m.constant(Value::ONE).unwrap();
        let zero = m.constant(Value::ZERO).unwrap();
        assert_eq!(q, m.ite_node(Var(1), one, zero).unwrap());
    }

    #[test]
    fn projection_of_foreign_variable_is_identity() {
        let m = AddManager::new(3);
        let one = m.constant(Value::ONE).unwrap();
        let zero = m.constant(Value::ZERO).unwrap();
        let f = m.ite_node(Var(1), one, zero).unwrap();
        assert_eq!(m.project(f, Var(3), Quant::Max).unwrap(), f);
        assert_eq!(m.derivative(f, Var(3)).unwrap(), zero);
    }

    #[test]
    fn compose_with_argmax_guide_equals_projection() {
        let m = mgr2();
        let f = or_plus_xor(&m);
        let g = m.sign(m.derivative(f, Var(1)).unwrap()).unwrap();
        let composed = m.compose(f, Var(1), g).unwrap();
        assert_eq!(composed, m.constant_weight(2).unwrap());
        assert_eq!(composed, m.project(f, Var(1), Quant::Max).unwrap());
    }

    #[test]
    fn compose_rejects_bad_guides() {
        let m = mgr2();
        let f = or_plus_xor(&m);
        let two = m.constant_weight(2).unwrap();
        assert_eq!(m.compose(f, Var(1), two), Err(AddError::GuideNotBoolean));
        let one = m.constant(Value::ONE).unwrap();
        let zero = m.constant(Value::ZERO).unwrap();
        let dep = m.ite_node(Var(1), one, zero).unwrap();
        assert_eq!(
            m.compose(f, Var(1), dep),
            Err(AddError::GuideDependsOnVariable(Var(1)))
        );
    }

    #[test]
    fn prune_cuts_below_floor() {
        let m = mgr2();
        let f = or_plus_xor(&m);
        let p = m.prune(f, 2).unwrap();
        for bits in 0..4u64 {
            let b = Assignment::from_bits(2, bits);
            let v = m.evaluate(f, &b).unwrap();
            let pv = m.evaluate(p, &b).unwrap();
            if v < Value::new(2).unwrap() {
                assert_eq!(pv, Value::NEG_INF);
            } else {
                assert_eq!(pv, v);
            }
        }
        // Floor below every terminal: identical handle.
        assert_eq!(m.prune(f, 0).unwrap(), f);
        // NEG_INF stays NEG_INF under any floor.
        let ninf = m.constant(Value::NEG_INF).unwrap();
        assert_eq!(m.prune(ninf, -100).unwrap(), ninf);
    }

    #[test]
    fn evaluate_requires_support() {
        let m = mgr2();
        let f = or_plus_xor(&m);
        let mut b = Assignment::new(2);
        b.set(Var(2), true);
        assert_eq!(m.evaluate(f, &b), Err(AddError::UnassignedVariable(Var(1))));
        b.set(Var(1), false);
        assert_eq!(m.evaluate(f, &b).unwrap(), Value::new(2).unwrap());
    }

    #[test]
    fn ordering_violation_detected() {
        let m = mgr2();
        let one = m.constant(Value::ONE).unwrap();
        let zero = m.constant(Value::ZERO).unwrap();
        let over_x1 = m.ite_node(Var(1), one, zero).unwrap();
        assert_eq!(
            m.ite_node(Var(2), over_x1, zero),
            Err(AddError::OrderViolation(Var(2)))
        );
        assert_eq!(
            m.ite_node(Var(1), over_x1, zero),
            Err(AddError::OrderViolation(Var(1)))
        );
    }

    #[test]
    fn custom_order_reverses_legality() {
        let m = AddManager::with_order(2, &[Var(2), Var(1)]).unwrap();
        let one = m.constant(Value::ONE).unwrap();
        let zero = m.constant(Value::ZERO).unwrap();
        let over_x1 = m.ite_node(Var(1), one, zero).unwrap();
        assert!(m.ite_node(Var(2), over_x1, zero).is_ok());
    }

    #[test]
    fn manager_mismatch_detected() {
        let m1 = mgr2();
        let m2 = mgr2();
        let a = m1.constant_weight(1).unwrap();
        let b = m2.constant_weight(1).unwrap();
        assert_eq!(m1.sum(a, b), Err(AddError::ManagerMismatch));
    }

    #[test]
    fn terminal_extremes() {
        let m = mgr2();
        let f = or_plus_xor(&m);
        assert_eq!(m.max_terminal(f).unwrap(), Value::new(2).unwrap());
        assert_eq!(m.min_terminal(f).unwrap(), Value::ZERO);
        let ninf = m.constant(Value::NEG_INF).unwrap();
        assert_eq!(m.max_terminal(ninf).unwrap(), Value::NEG_INF);
    }

    #[test]
    fn pos_inf_not_constructible() {
        let m = mgr2();
        assert_eq!(m.constant(Value::POS_INF), Err(AddError::ReservedValue));
        assert_eq!(m.constant_weight(i64::MAX), Err(AddError::ReservedValue));
    }

    #[test]
    fn sum_overflow_is_reported() {
        let m = mgr2();
        let big = m.constant_weight(i64::MAX - 1).unwrap();
        assert_eq!(m.sum(big, big), Err(AddError::Overflow));
    }

    #[test]
    fn live_count_shares_structure() {
        let m = mgr2();
        let a = clause_or(&m);
        let b = xor2(&m);
        let both = m.live_count(&[a, b]).unwrap();
        assert!(both <= m.node_count(a).unwrap() + m.node_count(b).unwrap());
        assert!(both >= m.node_count(a).unwrap());
    }

    #[test]
    fn dot_mentions_every_variable() {
        let m = mgr2();
        let f = or_plus_xor(&m);
        let dot = m.to_dot(f, "f").unwrap();
        assert!(dot.contains("x1"));
        assert!(dot.contains("x2"));
        assert!(dot.starts_with("digraph"));
    }
}
