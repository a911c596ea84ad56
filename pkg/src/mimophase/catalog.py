"""Reference systems used in the documentation and the acceptance suite."""

# Lightly damped 2x2 system whose responses stay cramped at every frequency
# while the phase spread over nonnegative frequency exceeds pi.
FREQUENCYWISE_CRAMPED_2X2 = (
    "1/(s^2+2s+200), 2/(s^2+2s+200);"
    " 2/(s^2+2s+200), (0.2s^3+0.5s^2+44.2s+24)/(s^3+3s^2+202s+200)"
)

# 2x2 system that is half-cramped but neither positive real nor negative imaginary.
HALF_CRAMPED_2X2 = (
    "(s^3+6.5s^2+10s+6)/(s^3+1.5s^2+1.5s+1), (s+2)/(s+1);"
    " (s+2)/(s+1), (s+2)/(s+1)"
)
