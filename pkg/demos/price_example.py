"""
Pricing a dilutive warrant
==========================

50 shares at 100, 100 warrants with one share each struck at 50, three
years to expiry.  The firm value and its volatility are first approximated
by N S_t and the stock volatility.
"""

from uwarrant import FirmCapitalStructure, MarketObservables, dfw_dv, elasticity, price_warrant, pricing_terms

cap = FirmCapitalStructure(n_shares=50, m_warrants=100, k_ratio=1, j_payment=50)
mkt = MarketObservables(stock_price=100, stock_vol=0.04, rate=0.04, horizon=3, drift=0.02)

v_t = cap.n_shares * mkt.stock_price
sigma = mkt.stock_vol

terms = pricing_terms(v_t, sigma, cap, mkt)
print("c      =", terms.c)
print("alpha0 =", terms.alpha0)  # levels below this expire worthless
print("f_w    =", price_warrant(v_t, sigma, cap, mkt))

# sensitivities
print("df_w/dV =", dfw_dv(v_t, sigma, cap, mkt))
print("beta    =", elasticity(v_t, sigma, cap, mkt))

# the price grows with firm volatility
for s in (0.0, 0.02, 0.04, 0.08, 0.16):
    print(f"sigma={s:.2f}  f_w={price_warrant(v_t, s, cap, mkt):.6f}")
