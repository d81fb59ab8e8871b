//! Classic node-splitting B-Tree baseline. Non-root nodes keep between
//! `b` and `2b` keys; splits push medians up, deletes borrow from or merge
//! with siblings on the way back out.

use crate::policy::Key;
use crate::search::insertion_point;

struct BNode<V> {
    keys: Vec<Key>,
    values: Vec<V>,
    /// Empty for leaves, `keys.len() + 1` entries otherwise.
    children: Vec<BNode<V>>,
}

impl<V> BNode<V> {
    fn leaf() -> Self {
        BNode {
            keys: Vec::new(),
            values: Vec::new(),
            children: Vec::new(),
        }
    }

    fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

pub struct ClassicBTree<V> {
    root: Option<BNode<V>>,
    b: usize,
    len: usize,
    visits: u64,
}

enum Inserted<V> {
    Done,
    Existed,
    Split(Key, V, BNode<V>),
}

impl<V> ClassicBTree<V> {
    pub fn new(b: usize) -> Self {
        assert!(b >= 1, "minimum occupancy must be at least 1");
        ClassicBTree {
            root: None,
            b,
            len: 0,
            visits: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn node_visits(&self) -> u64 {
        self.visits
    }

    pub fn reset_visits(&mut self) {
        self.visits = 0;
    }

    /// Tree height in edges; 0 for empty and single-node trees.
    pub fn height(&self) -> usize {
        let mut h = 0;
        let Some(mut node) = self.root.as_ref() else {
            return 0;
        };
        while !node.is_leaf() {
            node = &node.children[0];
            h += 1;
        }
        h
    }

    /// Checks sorted order, occupancy bounds, and uniform leaf depth.
    pub fn check_structure(&self) -> Result<(), String> {
        let Some(root) = &self.root else {
            return Ok(());
        };
        if root.keys.is_empty() {
            return Err("empty root node".into());
        }
        let mut prev = None;
        let mut leaf_depth = None;
        check_bnode(root, self.b, true, 0, &mut prev, &mut leaf_depth)
    }
}

impl<V: Clone> ClassicBTree<V> {
    pub fn get(&mut self, key: Key) -> Option<V> {
        let mut node = self.root.as_ref()?;
        loop {
            self.visits += 1;
            let pos = insertion_point(&node.keys, key);
            if pos < node.keys.len() && node.keys[pos] == key {
                return Some(node.values[pos].clone());
            }
            if node.is_leaf() {
                return None;
            }
            node = &node.children[pos];
        }
    }

    /// Adds the pair if the key is absent; an existing key keeps its value.
    pub fn insert(&mut self, key: Key, value: V) {
        let Some(root) = self.root.as_mut() else {
            let mut node = BNode::leaf();
            node.keys.push(key);
            node.values.push(value);
            self.root = Some(node);
            self.len = 1;
            return;
        };
        match insert_rec(root, key, value, self.b, &mut self.visits) {
            Inserted::Done => self.len += 1,
            Inserted::Existed => {}
            Inserted::Split(k, v, right) => {
                self.len += 1;
                let old_root = self.root.take().unwrap();
                let mut new_root = BNode::leaf();
                new_root.keys.push(k);
                new_root.values.push(v);
                new_root.children.push(old_root);
                new_root.children.push(right);
                self.root = Some(new_root);
            }
        }
    }

    pub fn delete(&mut self, key: Key) {
        let Some(root) = self.root.as_mut() else {
            return;
        };
        if delete_rec(root, key, self.b, &mut self.visits) {
            self.len -= 1;
        }
        let root = self.root.as_mut().unwrap();
        if root.keys.is_empty() {
            // Height shrinks (or the tree empties).
            self.root = if root.is_leaf() {
                None
            } else {
                Some(root.children.pop().unwrap())
            };
        }
    }
}

fn insert_rec<V>(
    node: &mut BNode<V>,
    key: Key,
    value: V,
    b: usize,
    visits: &mut u64,
) -> Inserted<V> {
    *visits += 1;
    let pos = insertion_point(&node.keys, key);
    if pos < node.keys.len() && node.keys[pos] == key {
        return Inserted::Existed;
    }
    if node.is_leaf() {
        node.keys.insert(pos, key);
        node.values.insert(pos, value);
    } else {
        match insert_rec(&mut node.children[pos], key, value, b, visits) {
            Inserted::Split(k, v, right) => {
                node.keys.insert(pos, k);
                node.values.insert(pos, v);
                node.children.insert(pos + 1, right);
            }
            other => return other,
        }
    }
    if node.keys.len() > 2 * b {
        let mid = b;
        let mut right = BNode::leaf();
        right.keys = node.keys.split_off(mid + 1);
        right.values = node.values.split_off(mid + 1);
        if !node.is_leaf() {
            right.children = node.children.split_off(mid + 1);
        }
        let k = node.keys.pop().unwrap();
        let v = node.values.pop().unwrap();
        return Inserted::Split(k, v, right);
    }
    Inserted::Done
}

fn delete_rec<V>(node: &mut BNode<V>, key: Key, b: usize, visits: &mut u64) -> bool {
    *visits += 1;
    let pos = insertion_point(&node.keys, key);
    let found = pos < node.keys.len() && node.keys[pos] == key;
    if node.is_leaf() {
        if found {
            node.keys.remove(pos);
            node.values.remove(pos);
        }
        return found;
    }
    if found {
        // Replace with the predecessor from the left child's subtree.
        let (k, v) = take_max(&mut node.children[pos], b, visits);
        node.keys[pos] = k;
        node.values[pos] = v;
        rebalance_if_light(node, pos, b);
        return true;
    }
    let removed = delete_rec(&mut node.children[pos], key, b, visits);
    rebalance_if_light(node, pos, b);
    removed
}

fn take_max<V>(node: &mut BNode<V>, b: usize, visits: &mut u64) -> (Key, V) {
    *visits += 1;
    if node.is_leaf() {
        let k = node.keys.pop().unwrap();
        let v = node.values.pop().unwrap();
        return (k, v);
    }
    let last = node.children.len() - 1;
    let kv = take_max(&mut node.children[last], b, visits);
    rebalance_if_light(node, last, b);
    kv
}

fn rebalance_if_light<V>(parent: &mut BNode<V>, child_idx: usize, b: usize) {
    if parent.children[child_idx].keys.len() >= b {
        return;
    }
    if child_idx > 0 && parent.children[child_idx - 1].keys.len() > b {
        rotate_from_left(parent, child_idx);
    } else if child_idx + 1 < parent.children.len() && parent.children[child_idx + 1].keys.len() > b
    {
        rotate_from_right(parent, child_idx);
    } else if child_idx > 0 {
        merge_children(parent, child_idx - 1);
    } else {
        merge_children(parent, child_idx);
    }
}

fn rotate_from_left<V>(parent: &mut BNode<V>, child_idx: usize) {
    let sep = child_idx - 1;
    let (k, v, moved_child) = {
        let left = &mut parent.children[sep];
        let k = left.keys.pop().unwrap();
        let v = left.values.pop().unwrap();
        let c = if left.is_leaf() {
            None
        } else {
            Some(left.children.pop().unwrap())
        };
        (k, v, c)
    };
    let pk = std::mem::replace(&mut parent.keys[sep], k);
    let pv = std::mem::replace(&mut parent.values[sep], v);
    let child = &mut parent.children[child_idx];
    child.keys.insert(0, pk);
    child.values.insert(0, pv);
    if let Some(c) = moved_child {
        child.children.insert(0, c);
    }
}

fn rotate_from_right<V>(parent: &mut BNode<V>, child_idx: usize) {
    let sep = child_idx;
    let (k, v, moved_child) = {
        let right = &mut parent.children[child_idx + 1];
        let k = right.keys.remove(0);
        let v = right.values.remove(0);
        let c = if right.is_leaf() {
            None
        } else {
            Some(right.children.remove(0))
        };
        (k, v, c)
    };
    let pk = std::mem::replace(&mut parent.keys[sep], k);
    let pv = std::mem::replace(&mut parent.values[sep], v);
    let child = &mut parent.children[child_idx];
    child.keys.push(pk);
    child.values.push(pv);
    if let Some(c) = moved_child {
        child.children.push(c);
    }
}

/// Merges children `i` and `i+1` around separator key `i`.
fn merge_children<V>(parent: &mut BNode<V>, i: usize) {
    let mut right = parent.children.remove(i + 1);
    let k = parent.keys.remove(i);
    let v = parent.values.remove(i);
    let left = &mut parent.children[i];
    left.keys.push(k);
    left.values.push(v);
    left.keys.append(&mut right.keys);
    left.values.append(&mut right.values);
    left.children.append(&mut right.children);
}

fn check_bnode<V>(
    node: &BNode<V>,
    b: usize,
    is_root: bool,
    depth: usize,
    prev: &mut Option<Key>,
    leaf_depth: &mut Option<usize>,
) -> Result<(), String> {
    let n = node.keys.len();
    if n == 0 || (!is_root && n < b) || n > 2 * b {
        return Err(format!("occupancy violation: {n} keys (b = {b})"));
    }
    if !node.is_leaf() && node.children.len() != n + 1 {
        return Err("child arity mismatch".into());
    }
    if node.is_leaf() {
        match leaf_depth {
            Some(d) if *d != depth => return Err("ragged leaf depth".into()),
            None => *leaf_depth = Some(depth),
            _ => {}
        }
    }
    for i in 0..n {
        if !node.is_leaf() {
            check_bnode(&node.children[i], b, false, depth + 1, prev, leaf_depth)?;
        }
        if let Some(p) = *prev {
            if node.keys[i] <= p {
                return Err(format!("in-order violation at key {}", node.keys[i]));
            }
        }
        *prev = Some(node.keys[i]);
    }
    if !node.is_leaf() {
        check_bnode(&node.children[n], b, false, depth + 1, prev, leaf_depth)?;
    }
    Ok(())
}
