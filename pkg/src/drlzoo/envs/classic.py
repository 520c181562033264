"""Cart-pole and pendulum with the classic-control dynamics."""

from __future__ import annotations

import math

import numpy as np

from .core import Environment
from .spaces import Box, Discrete


class CartPole(Environment):
    name = "CartPole-v0"
    env_type = "classic_control"
    horizon = 200

    gravity = 9.8
    mass_cart = 1.0
    mass_pole = 0.1
    half_length = 0.5
    force_mag = 10.0
    dt = 0.02
    x_limit = 2.4
    theta_limit = 12 * 2 * math.pi / 360

    def __init__(self):
        super().__init__()
        high = np.array([self.x_limit * 2, np.inf, self.theta_limit * 2, np.inf], dtype=np.float32)
        self.observation_space = Box(-high, high)
        self.action_space = Discrete(2)
        self.state = np.zeros(4)

    def _reset(self):
        self.state = self.rng.uniform(-0.05, 0.05, size=4)
        return self.state.astype(np.float32)

    def _step(self, action):
        x, x_dot, theta, theta_dot = self.state
        force = self.force_mag if action == 1 else -self.force_mag
        total_mass = self.mass_cart + self.mass_pole
        pml = self.mass_pole * self.half_length
        cos_t, sin_t = math.cos(theta), math.sin(theta)
        temp = (force + pml * theta_dot ** 2 * sin_t) / total_mass
        theta_acc = (self.gravity * sin_t - cos_t * temp) / (
            self.half_length * (4.0 / 3.0 - self.mass_pole * cos_t ** 2 / total_mass))
        x_acc = temp - pml * theta_acc * cos_t / total_mass
        x = x + self.dt * x_dot
        x_dot = x_dot + self.dt * x_acc
        theta = theta + self.dt * theta_dot
        theta_dot = theta_dot + self.dt * theta_acc
        self.state = np.array([x, x_dot, theta, theta_dot])
        terminated = abs(x) > self.x_limit or abs(theta) > self.theta_limit
        return self.state.astype(np.float32), 1.0, terminated


def wrap_angle(theta: float) -> float:
    return ((theta + math.pi) % (2 * math.pi)) - math.pi


class Pendulum(Environment):
    """Swing-up pendulum; theta = 0 is upright."""

    name = "Pendulum-v0"
    env_type = "classic_control"
    horizon = 200

    max_speed = 8.0
    max_torque = 2.0
    dt = 0.05
    g = 10.0
    m = 1.0
    length = 1.0

    def __init__(self):
        super().__init__()
        high = np.array([1.0, 1.0, self.max_speed], dtype=np.float32)
        self.observation_space = Box(-high, high)
        self.action_space = Box(-self.max_torque, self.max_torque, (1,))
        self.state = np.zeros(2)

    def _obs(self):
        theta, theta_dot = self.state
        return np.array([math.cos(theta), math.sin(theta), theta_dot], dtype=np.float32)

    def _reset(self):
        self.state = np.array([self.rng.uniform(-math.pi, math.pi), self.rng.uniform(-1.0, 1.0)])
        return self._obs()

    def _step(self, action):
        theta, theta_dot = self.state
        u = float(np.asarray(action).reshape(-1)[0])
        reward = pendulum_reward(theta, theta_dot, u)
        theta_dot = theta_dot + (3 * self.g / (2 * self.length) * math.sin(theta)
                                 + 3.0 / (self.m * self.length ** 2) * u) * self.dt
        theta_dot = min(max(theta_dot, -self.max_speed), self.max_speed)
        theta = theta + theta_dot * self.dt
        self.state = np.array([theta, theta_dot])
        return self._obs(), reward, False


def pendulum_reward(theta: float, theta_dot: float, u: float) -> float:
    return -(wrap_angle(theta) ** 2 + 0.1 * theta_dot ** 2 + 0.001 * u ** 2)
