/**
 * Organ viewport: three.js rendering of the mesh, the live dent, and the
 * accumulated force-map cones.
 *
 * All haptic truth arrives in state messages; this module only draws. The
 * dent is re-evaluated client-side from the deformation recipe with the same
 * kernel the engine uses (pinned by the shared golden vectors), and vertex
 * colors come from the service's constant organ tint, never from any
 * material data.
 */

import * as THREE from "three";
import { colorBufferFrom } from "./colors";
import { displaceVertices } from "./kernel";
import type { ConeInfo, MeshMessage, StateMessage } from "./protocol";
import { intersectMesh, type RayHit, type Vec3 } from "./raycast";

export class OrganScene {
  private renderer: THREE.WebGLRenderer;
  private scene = new THREE.Scene();
  private camera: THREE.PerspectiveCamera;
  private organ: THREE.Mesh | null = null;
  private basePositions: Float32Array | null = null;
  private meshData: MeshMessage | null = null;
  private coneGroup = new THREE.Group();
  private cursor: THREE.Mesh;

  constructor(canvas: HTMLCanvasElement) {
    this.renderer = new THREE.WebGLRenderer({ canvas, antialias: true });
    this.camera = new THREE.PerspectiveCamera(40, 1, 0.01, 10);
    this.camera.position.set(0, 0.12, 0.28);
    this.camera.lookAt(0, 0, 0);
    this.scene.background = new THREE.Color(0x10141a);
    this.scene.add(new THREE.AmbientLight(0xffffff, 0.55));
    const key = new THREE.DirectionalLight(0xffffff, 1.4);
    key.position.set(0.3, 0.6, 0.4);
    this.scene.add(key);
    const rim = new THREE.DirectionalLight(0x88aaff, 0.4);
    rim.position.set(-0.4, 0.2, -0.3);
    this.scene.add(rim);
    this.scene.add(this.coneGroup);

    this.cursor = new THREE.Mesh(
      new THREE.SphereGeometry(0.004, 16, 12),
      new THREE.MeshBasicMaterial({ color: 0xffe08a }),
    );
    this.cursor.visible = false;
    this.scene.add(this.cursor);
  }

  loadMesh(msg: MeshMessage): void {
    if (this.organ) {
      this.scene.remove(this.organ);
      this.organ.geometry.dispose();
    }
    this.coneGroup.clear();
    this.meshData = msg;
    this.basePositions = Float32Array.from(msg.vertices);

    const geometry = new THREE.BufferGeometry();
    geometry.setAttribute(
      "position",
      new THREE.BufferAttribute(Float32Array.from(msg.vertices), 3),
    );
    geometry.setAttribute(
      "normal",
      new THREE.BufferAttribute(Float32Array.from(msg.normals), 3),
    );
    geometry.setAttribute(
      "color",
      new THREE.BufferAttribute(colorBufferFrom(msg), 3),
    );
    geometry.setIndex(new THREE.BufferAttribute(Uint32Array.from(msg.triangles), 1));

    const material = new THREE.MeshPhongMaterial({
      vertexColors: true,
      shininess: 18,
      specular: new THREE.Color(0x202020),
    });
    this.organ = new THREE.Mesh(geometry, material);
    this.scene.add(this.organ);
  }

  get hasMesh(): boolean {
    return this.organ !== null;
  }

  /** Apply one state message: dent the mesh and append any new cones. */
  applyState(state: StateMessage): void {
    if (!this.organ || !this.basePositions) return;
    const attr = this.organ.geometry.getAttribute("position") as THREE.BufferAttribute;
    const out = attr.array as Float32Array;
    if (state.deform) {
      displaceVertices(this.basePositions, out, state.deform);
      this.cursor.position.set(...state.deform.point);
      this.cursor.visible = true;
    } else {
      out.set(this.basePositions);
      this.cursor.visible = false;
    }
    attr.needsUpdate = true;
    this.organ.geometry.computeVertexNormals();
    for (const cone of state.cones_new) this.addCone(cone);
  }

  addCone(cone: ConeInfo): void {
    const geometry = new THREE.ConeGeometry(cone.radius, cone.height, 16);
    const material = new THREE.MeshPhongMaterial({
      color: 0xd6a345,
      transparent: true,
      opacity: 0.85,
    });
    const mesh = new THREE.Mesh(geometry, material);
    const axis = new THREE.Vector3(...cone.axis);
    // the geometry's tip points +y; turn +y onto -axis and shift so the tip
    // sits exactly on the surface contact point with the base outward
    mesh.quaternion.setFromUnitVectors(
      new THREE.Vector3(0, 1, 0),
      axis.clone().negate(),
    );
    mesh.position
      .set(...cone.apex)
      .addScaledVector(axis, cone.height / 2);
    this.coneGroup.add(mesh);
  }

  clearCones(): void {
    this.coneGroup.clear();
  }

  /** Pointer-events coordinates -> intersection with the undeformed organ. */
  pick(clientX: number, clientY: number): { hit: RayHit | null; rayDir: Vec3 } {
    const el = this.renderer.domElement;
    const rect = el.getBoundingClientRect();
    const ndc = new THREE.Vector2(
      ((clientX - rect.left) / rect.width) * 2 - 1,
      -((clientY - rect.top) / rect.height) * 2 + 1,
    );
    const origin = this.camera.position;
    const target = new THREE.Vector3(ndc.x, ndc.y, 0.5).unproject(this.camera);
    const dir = target.sub(origin).normalize();
    const rayDir: Vec3 = [dir.x, dir.y, dir.z];
    if (!this.meshData) return { hit: null, rayDir };
    const hit = intersectMesh(
      [origin.x, origin.y, origin.z],
      rayDir,
      this.meshData.vertices,
      this.meshData.triangles,
    );
    return { hit, rayDir };
  }

  resize(width: number, height: number): void {
    this.renderer.setSize(width, height, false);
    this.camera.aspect = width / height;
    this.camera.updateProjectionMatrix();
  }

  render(): void {
    this.renderer.render(this.scene, this.camera);
  }
}
