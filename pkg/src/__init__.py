"""levy-bridges: симметричные α-устойчивые мосты Леви."""

__version__ = "0.1.0"
