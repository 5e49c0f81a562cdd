use super::{Drive, Model, Side};

/// Boundary flows (mol·s⁻¹) and inventory (mol) of one species.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SpeciesAccount {
    pub inflow: f64,
    pub outflow: f64,
    /// Consumption rate; negative for a product.
    pub reacted: f64,
    pub inventory: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Account {
    pub h2: SpeciesAccount,
    pub o2: SpeciesAccount,
    pub h2o: SpeciesAccount,
}

impl Model {
    /// Liquid leaving the GDL into the channel, mol·m⁻²·s⁻¹.
    pub fn liquid_drain(&self, side: Side, y: &[f64]) -> f64 {
        let s0 = y[self.layout.s_gdl(side, 0)];
        self.rho_m * self.capillary(0.5 * s0, self.cap_gdl) * s0 / (0.5 * self.dx)
    }

    /// Water held on one side: channel vapor, GDL and CL vapor and liquid.
    pub fn water_inventory(&self, side: Side, y: &[f64]) -> f64 {
        let l = &self.layout;
        let g = &self.config.accessible;
        let eps = self.config.undetermined.eps_gdl;
        let mut per_area = 0.0;
        for k in 0..l.n_gdl() {
            per_area += eps * self.dx * (y[l.cv_gdl(side, k)] + self.rho_m * y[l.s_gdl(side, k)]);
        }
        per_area += self.eps_cl * g.h_cl * (y[l.cv_cl(side)] + self.rho_m * y[l.s_cl(side)]);
        per_area * g.a_act + y[l.cv_gc(side)] * self.v_gc
    }

    pub fn account(&self, y: &[f64], drive: &Drive) -> Account {
        let l = &self.layout;
        let c = &self.consts;
        let g = &self.config.accessible;
        let a = g.a_act;
        let i = drive.i;
        let flows = self.flows(y, drive);
        let [fa, fc] = flows.side;

        let dry_sm =
            |side: Side, v: f64| (y[l.p_sm(side)] - y[l.phi_sm(side)] * self.p_sat) * v / self.rt;
        let em_moles = |side: Side, v: f64| y[l.p_em(side)] * v / self.rt;
        let anode_outlet = !self.closed_anode;

        let mut h2 = SpeciesAccount {
            inflow: fa.dry_in,
            outflow: (fa.valve + fa.purge) * fa.x_gc[1],
            reacted: i * a / (2.0 * c.f),
            inventory: dry_sm(Side::Anode, g.v_sm_a)
                + y[l.c_h2_gc()] * self.v_gc
                + y[l.c_h2_cl()] * self.eps_cl * g.h_cl * a,
        };
        if anode_outlet {
            h2.inventory += em_moles(Side::Anode, g.v_em_a) * fa.x_gc[1];
        }

        let o2 = SpeciesAccount {
            inflow: fc.dry_in * c.y_o2_air,
            outflow: fc.valve * fc.x_gc[1],
            reacted: i * a / (4.0 * c.f),
            inventory: dry_sm(Side::Cathode, g.v_sm_c) * c.y_o2_air
                + y[l.c_o2_gc()] * self.v_gc
                + em_moles(Side::Cathode, g.v_em_c) * fc.x_gc[1]
                + y[l.c_o2_cl()] * self.eps_cl * g.h_cl * a,
        };

        let mut h2o = SpeciesAccount {
            inflow: fa.x_v_sm * fa.sm_to_gc + fc.x_v_sm * fc.sm_to_gc,
            outflow: 0.0,
            reacted: -i * a / (2.0 * c.f),
            inventory: 0.0,
        };
        for (side, f) in [(Side::Anode, &fa), (Side::Cathode, &fc)] {
            let condensed =
                -super::phase_exchange_with(c, y[l.cv_gc(side)], 0.0, self.c_sat).min(0.0);
            h2o.outflow += (f.valve + f.purge) * f.x_gc[0]
                + condensed * self.v_gc
                + self.liquid_drain(side, y) * a;
            h2o.inventory += self.water_inventory(side, y);
        }
        h2o.inventory += em_moles(Side::Cathode, g.v_em_c) * fc.x_gc[0];
        if anode_outlet {
            h2o.inventory += em_moles(Side::Anode, g.v_em_a) * fa.x_gc[0];
        }
        let lam = [y[l.lambda(0)], y[l.lambda(1)], y[l.lambda(2)]];
        let eps_mc = self.config.undetermined.eps_mc;
        h2o.inventory += self.c_m * a * (eps_mc * g.h_cl * (lam[0] + lam[2]) + g.h_mem * lam[1]);
        Account { h2, o2, h2o }
    }
}
