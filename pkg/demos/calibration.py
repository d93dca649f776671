"""
Recovering firm value and volatility
====================================

Firm value and volatility are not observed.  calibrate solves for the pair
that reproduces the share price and the stock volatility once the warrants
are accounted for.
"""

from uwarrant import FirmCapitalStructure, MarketObservables, calibrate, implied_stock_vol

cap = FirmCapitalStructure(n_shares=50, m_warrants=100, k_ratio=1, j_payment=50)
mkt = MarketObservables(stock_price=100, stock_vol=0.04, rate=0.04, horizon=3, drift=0.02)

result = calibrate(cap, mkt)
print("sigma* =", result.sigma_star)
print("V*     =", result.v_star)
print("f_w    =", result.price)
print("beta   =", result.beta)
print("residuals:", result.residual_value, result.residual_vol)
print("root refinements:", result.iterations)

# check: feeding the solution back reproduces the observed stock volatility
print("implied stock vol:", implied_stock_vol(result.v_star, result.sigma_star, cap, mkt))

# without warrants the firm is just its shares
plain = calibrate(FirmCapitalStructure(50, 0, 1, 50), mkt)
print("M = 0:", plain.sigma_star, plain.v_star)
