//! Splay tree baseline: top-down splaying, physical deletes.

use crate::policy::Key;

struct SplayNode<V> {
    key: Key,
    value: V,
    left: Link<V>,
    right: Link<V>,
}

type Link<V> = Option<Box<SplayNode<V>>>;

pub struct SplayTree<V> {
    root: Link<V>,
    len: usize,
    visits: u64,
}

impl<V> Default for SplayTree<V> {
    fn default() -> Self {
        Self::new()
    }
}

impl<V> SplayTree<V> {
    pub fn new() -> Self {
        SplayTree {
            root: None,
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

    /// Nodes touched while searching, a timing-free work proxy.
    pub fn node_visits(&self) -> u64 {
        self.visits
    }

    pub fn reset_visits(&mut self) {
        self.visits = 0;
    }

    pub fn root_key(&self) -> Option<Key> {
        self.root.as_ref().map(|n| n.key)
    }

    fn splay_to_root(&mut self, key: Key) {
        if let Some(root) = self.root.take() {
            self.root = Some(splay(root, key, &mut self.visits));
        }
    }
}

impl<V: Clone> SplayTree<V> {
    /// Splays the searched key (or its neighbor) to the root, then reads it.
    pub fn get(&mut self, key: Key) -> Option<V> {
        self.splay_to_root(key);
        match &self.root {
            Some(n) if n.key == key => Some(n.value.clone()),
            _ => None,
        }
    }

    /// Adds the pair if absent; the new node becomes the root. An existing
    /// key keeps its stored value.
    pub fn insert(&mut self, key: Key, value: V) {
        let Some(root) = self.root.take() else {
            self.root = Some(Box::new(SplayNode {
                key,
                value,
                left: None,
                right: None,
            }));
            self.len = 1;
            return;
        };
        let mut root = splay(root, key, &mut self.visits);
        if root.key == key {
            self.root = Some(root);
            return;
        }
        let mut node = Box::new(SplayNode {
            key,
            value,
            left: None,
            right: None,
        });
        if key < root.key {
            node.left = root.left.take();
            node.right = Some(root);
        } else {
            node.right = root.right.take();
            node.left = Some(root);
        }
        self.root = Some(node);
        self.len += 1;
    }

    /// Physically removes the key, joining the two subtrees.
    pub fn delete(&mut self, key: Key) {
        let Some(root) = self.root.take() else {
            return;
        };
        let mut root = splay(root, key, &mut self.visits);
        if root.key != key {
            self.root = Some(root);
            return;
        }
        self.len -= 1;
        let right = root.right.take();
        self.root = match root.left.take() {
            None => right,
            Some(left) => {
                // Splaying the deleted key brings the left subtree's
                // maximum to its root, leaving a free right slot.
                let mut left = splay(left, key, &mut self.visits);
                left.right = right;
                Some(left)
            }
        };
    }
}

/// Top-down splay: returns a tree rooted at `key`'s node, or at the last
/// node on the search path when the key is absent.
fn splay<V>(mut node: Box<SplayNode<V>>, key: Key, visits: &mut u64) -> Box<SplayNode<V>> {
    let mut left_spine: Vec<Box<SplayNode<V>>> = Vec::new();
    let mut right_spine: Vec<Box<SplayNode<V>>> = Vec::new();
    loop {
        *visits += 1;
        if key < node.key {
            if node.left.is_none() {
                break;
            }
            if key < node.left.as_ref().unwrap().key {
                // Rotate right.
                let mut child = node.left.take().unwrap();
                node.left = child.right.take();
                child.right = Some(node);
                node = child;
                if node.left.is_none() {
                    break;
                }
            }
            let next = node.left.take().unwrap();
            right_spine.push(node);
            node = next;
        } else if key > node.key {
            if node.right.is_none() {
                break;
            }
            if key > node.right.as_ref().unwrap().key {
                // Rotate left.
                let mut child = node.right.take().unwrap();
                node.right = child.left.take();
                child.left = Some(node);
                node = child;
                if node.right.is_none() {
                    break;
                }
            }
            let next = node.right.take().unwrap();
            left_spine.push(node);
            node = next;
        } else {
            break;
        }
    }
    // Reassemble: the spines hold the split-off pieces in depth order.
    let mut left = node.left.take();
    while let Some(mut piece) = left_spine.pop() {
        piece.right = left;
        left = Some(piece);
    }
    let mut right = node.right.take();
    while let Some(mut piece) = right_spine.pop() {
        piece.left = right;
        right = Some(piece);
    }
    node.left = left;
    node.right = right;
    node
}
