struct A {
  int a;
  virtual int f() { return 1; }
};
struct B {
  int b;
  virtual int g() { return 2; }
};
struct C : A, B {
  int c;
  C() { c = 30; }
  int g() { return c + 2; }
};
int main() {
  C obj;
  B *pb = &obj;
  A *pa = &obj;
  assert(pb->g() == 32);
  assert(pa->f() == 1);
  return 0;
}
