"""Single-qubit gate matrices. Convention: R_a(theta) = exp(-i theta sigma_a / 2)."""
import numpy as np

I2 = np.eye(2, dtype=np.complex128)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)

PAULIS = {"i": I2, "x": PAULI_X, "y": PAULI_Y, "z": PAULI_Z}


def rx(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=np.complex128)


def ry(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=np.complex128)


def rz(theta: float) -> np.ndarray:
    return np.array(
        [[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]], dtype=np.complex128
    )


def local_superposition(sign: int) -> np.ndarray:
    """L_V = (I + sign * iX) / sqrt(2); sign=+1 equals rx(-pi/2)."""
    return (I2 + sign * 1j * PAULI_X) / np.sqrt(2)


def is_unitary(gate: np.ndarray, atol: float = 1e-10) -> bool:
    gate = np.asarray(gate)
    if gate.shape != (2, 2):
        return False
    return bool(np.allclose(gate.conj().T @ gate, I2, rtol=0.0, atol=atol))
