#!/usr/bin/python3

"""Unit tests for mvdr.imageio"""

import unittest
import numpy as np
from mvdr.errors import ShapeError
from mvdr.imageio import ImagePlane, RGBImage, ViewSet, as_array


class TestImagePlane(unittest.TestCase):
    """test ImagePlane"""

    def test_init(self) -> None:
        """test ImagePlane.__init__"""
        data = np.array([[0.0, 0.5, 1.0], [0.25, 0.75, 0.5]])
        plane = ImagePlane(data)
        data[0, 0] = 1.0    # private copy
        self.assertEqual(plane.data[0, 0], 0.0)
        self.assertEqual(plane.shape, (3, 2))
        self.assertEqual(plane.width, 3)
        self.assertEqual(plane.height, 2)
        with self.assertRaises(ValueError):
            plane.data[0, 0] = 0.5
        with self.assertRaises(ShapeError):
            ImagePlane(np.zeros(4))
        with self.assertRaises(ShapeError):
            ImagePlane(np.zeros((0, 3)))
        with self.assertRaises(ValueError):
            ImagePlane(np.array([[1.5]]))
        with self.assertRaises(ValueError):
            ImagePlane(np.array([[np.nan]]))

    def test_constructors(self) -> None:
        """test ImagePlane.from_values and ImagePlane.constant"""
        plane = ImagePlane.from_values(2, 3, [0.0, 0.1, 0.2, 0.3, 0.4, 0.5])
        self.assertEqual(plane.shape, (2, 3))
        self.assertEqual(plane.data[1, 0], 0.2)
        np.testing.assert_array_equal(plane.values(), [0.0, 0.1, 0.2, 0.3, 0.4, 0.5])
        with self.assertRaises(ShapeError):
            ImagePlane.from_values(2, 2, [0.0])
        self.assertEqual(ImagePlane.constant(2, 3, 0.5), ImagePlane(np.full((3, 2), 0.5)))
        self.assertNotEqual(ImagePlane.constant(2, 3, 0.5), ImagePlane.constant(3, 2, 0.5))

    def test_as_array(self) -> None:
        """test as_array"""
        plane = ImagePlane.constant(2, 2, 0.25)
        self.assertIs(as_array(plane), plane.data)
        np.testing.assert_array_equal(as_array(np.ones((2, 3))), np.ones((2, 3)))
        with self.assertRaises(ShapeError):
            as_array(np.ones(3))


class TestViewSet(unittest.TestCase):
    """test ViewSet"""

    def test_iter(self) -> None:
        """test ViewSet.__iter__"""
        planes = [ImagePlane.constant(3, 2, value) for value in (0.1, 0.2, 0.3, 0.4, 0.5)]
        views = ViewSet(*planes[:4])
        self.assertEqual([name for name, _ in views], ["r", "g", "b", "gray"])
        views = ViewSet(*planes)
        self.assertEqual([name for name, _ in views], ["r", "g", "b", "gray", "depth"])
        self.assertEqual([plane for _, plane in views], planes)
        self.assertEqual(views.shape, (3, 2))

    def test_get(self) -> None:
        """test ViewSet.get"""
        plane = ImagePlane.constant(3, 2, 0.1)
        views = ViewSet(plane, plane, plane, plane)
        self.assertIs(views.get("gray"), plane)
        self.assertIsNone(views.get("depth"))
        with self.assertRaises(KeyError):
            views.get("alpha")

    def test_shape_mismatch(self) -> None:
        """test ViewSet.__init__ with planes of different size"""
        plane = ImagePlane.constant(3, 2, 0.1)
        with self.assertRaises(ShapeError):
            ViewSet(plane, plane, plane, plane, ImagePlane.constant(2, 3, 0.1))


class TestRGBImage(unittest.TestCase):
    """test RGBImage"""

    def test_channel(self) -> None:
        """test RGBImage.channel"""
        pixels = np.zeros((2, 3, 3))
        pixels[:, :, 1] = 0.5
        image = RGBImage(3, 2, pixels)
        self.assertEqual(image.channel(1), ImagePlane.constant(3, 2, 0.5))
        self.assertEqual(image.channel(0), ImagePlane.constant(3, 2, 0.0))
