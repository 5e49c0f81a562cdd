/// Side of the cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Anode = 0,
    Cathode = 1,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Anode, Side::Cathode];

    pub fn tag(self) -> &'static str {
        match self {
            Side::Anode => "a",
            Side::Cathode => "c",
        }
    }
}

/// Slot map of the flattened state. GDL cells are numbered from the
/// channel (`k = 0`) toward the catalyst layer on each side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StateLayout {
    n: usize,
}

impl StateLayout {
    pub fn new(n_gdl: usize) -> Self {
        Self { n: n_gdl }
    }

    pub fn n_gdl(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        4 * self.n + 24
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cv_gc(&self, side: Side) -> usize {
        side as usize * (self.n + 2)
    }

    pub fn cv_gdl(&self, side: Side, k: usize) -> usize {
        debug_assert!(k < self.n);
        side as usize * (self.n + 2) + 1 + k
    }

    pub fn cv_cl(&self, side: Side) -> usize {
        side as usize * (self.n + 2) + self.n + 1
    }

    fn s_base(&self) -> usize {
        2 * self.n + 4
    }

    pub fn s_gdl(&self, side: Side, k: usize) -> usize {
        debug_assert!(k < self.n);
        self.s_base() + side as usize * (self.n + 1) + k
    }

    pub fn s_cl(&self, side: Side) -> usize {
        self.s_base() + side as usize * (self.n + 1) + self.n
    }

    /// Membrane water content: anode CL ionomer, membrane core, cathode CL ionomer.
    pub fn lambda(&self, node: usize) -> usize {
        debug_assert!(node < 3);
        4 * self.n + 6 + node
    }

    pub fn c_h2_gc(&self) -> usize {
        4 * self.n + 9
    }

    pub fn c_h2_cl(&self) -> usize {
        4 * self.n + 10
    }

    pub fn c_o2_gc(&self) -> usize {
        4 * self.n + 11
    }

    pub fn c_o2_cl(&self) -> usize {
        4 * self.n + 12
    }

    pub fn c_n2_gc(&self) -> usize {
        4 * self.n + 13
    }

    fn aux(&self) -> usize {
        4 * self.n + 14
    }

    pub fn p_sm(&self, side: Side) -> usize {
        self.aux() + side as usize
    }

    pub fn p_em(&self, side: Side) -> usize {
        self.aux() + 2 + side as usize
    }

    pub fn phi_sm(&self, side: Side) -> usize {
        self.aux() + 4 + side as usize
    }

    pub fn w_in(&self, side: Side) -> usize {
        self.aux() + 6 + side as usize
    }

    pub fn a_bp(&self, side: Side) -> usize {
        self.aux() + 8 + side as usize
    }

    /// Column label of every slot, in slot order.
    pub fn labels(&self) -> Vec<String> {
        let mut out = vec![String::new(); self.len()];
        for side in Side::BOTH {
            let t = side.tag();
            out[self.cv_gc(side)] = format!("C_v_gc_{t}");
            out[self.cv_cl(side)] = format!("C_v_cl_{t}");
            out[self.s_cl(side)] = format!("s_cl_{t}");
            for k in 0..self.n {
                out[self.cv_gdl(side, k)] = format!("C_v_gdl_{t}_{k}");
                out[self.s_gdl(side, k)] = format!("s_gdl_{t}_{k}");
            }
            out[self.p_sm(side)] = format!("P_sm_{t}");
            out[self.p_em(side)] = format!("P_em_{t}");
            out[self.phi_sm(side)] = format!("Phi_sm_{t}");
            out[self.w_in(side)] = format!("W_in_{t}");
            out[self.a_bp(side)] = format!("A_bp_{t}");
        }
        out[self.lambda(0)] = "lambda_a".into();
        out[self.lambda(1)] = "lambda_mem".into();
        out[self.lambda(2)] = "lambda_c".into();
        out[self.c_h2_gc()] = "C_H2_gc".into();
        out[self.c_h2_cl()] = "C_H2_cl".into();
        out[self.c_o2_gc()] = "C_O2_gc".into();
        out[self.c_o2_cl()] = "C_O2_cl".into();
        out[self.c_n2_gc()] = "C_N2_gc".into();
        out
    }
}
